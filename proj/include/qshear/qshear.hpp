#pragma once

#include "qshear/errors.hpp"
#include "qshear/tensor.hpp"
#include "qshear/states.hpp"
#include "qshear/dynamics.hpp"
#include "qshear/coords.hpp"
#include "qshear/integrator.hpp"
#include "qshear/analysis/corotational.hpp"
#include "qshear/analysis/equilibria.hpp"
#include "qshear/analysis/first_integrals.hpp"
#include "qshear/analysis/regimes.hpp"
