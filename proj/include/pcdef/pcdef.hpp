#pragma once

#include "pcdef/checkpoint.hpp"
#include "pcdef/common.hpp"
#include "pcdef/config.hpp"
#include "pcdef/constraints.hpp"
#include "pcdef/corruption.hpp"
#include "pcdef/dataset.hpp"
#include "pcdef/defense.hpp"
#include "pcdef/hessian.hpp"
#include "pcdef/model.hpp"
#include "pcdef/objective.hpp"
#include "pcdef/quantize.hpp"
#include "pcdef/special.hpp"
#include "pcdef/stats.hpp"
#include "pcdef/sweep.hpp"
#include "pcdef/tensor.hpp"
