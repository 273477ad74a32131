#pragma once

#include "ksd/accum.hpp"
#include "ksd/errors.hpp"
#include "ksd/estimators.hpp"
#include "ksd/finite_domain.hpp"
#include "ksd/gaussian.hpp"
#include "ksd/io.hpp"
#include "ksd/kernel.hpp"
#include "ksd/minimax.hpp"
#include "ksd/oracle.hpp"
#include "ksd/parallel.hpp"
#include "ksd/quadrature.hpp"
#include "ksd/rng.hpp"
#include "ksd/sample.hpp"
#include "ksd/stein.hpp"
