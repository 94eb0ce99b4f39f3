#pragma once

#include "cilp/assemble.hpp"
#include "cilp/chains.hpp"
#include "cilp/error.hpp"
#include "cilp/lp.hpp"
#include "cilp/measure.hpp"
#include "cilp/model.hpp"
#include "cilp/objective.hpp"
#include "cilp/oracle.hpp"
#include "cilp/parallel.hpp"
#include "cilp/scheme_a.hpp"
#include "cilp/scheme_b.hpp"
#include "cilp/simplex.hpp"
#include "cilp/state.hpp"
#include "cilp/truncation.hpp"
#include "cilp/validation.hpp"
