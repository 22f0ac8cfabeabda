#pragma once

#include "errors.hpp"
#include "jet.hpp"
#include "expr.hpp"
#include "parser.hpp"
#include "quadrature.hpp"
#include "eval.hpp"
#include "families.hpp"
#include "symmetry.hpp"
#include "verify.hpp"
#include "config.hpp"
#include "report.hpp"
