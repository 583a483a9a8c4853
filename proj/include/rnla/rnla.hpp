#pragma once

#include "rnla/rng.hpp"
#include "rnla/core.hpp"
#include "rnla/matrix_market.hpp"
#include "rnla/sketch.hpp"
#include "rnla/trace.hpp"
#include "rnla/matrix_mc.hpp"
#include "rnla/eig.hpp"
#include "rnla/lowrank.hpp"
#include "rnla/leastsq.hpp"
#include "rnla/precond.hpp"
