#pragma once

#include "mhr/common.hpp"
#include "mhr/config.hpp"
#include "mhr/dataset.hpp"
#include "mhr/eval.hpp"
#include "mhr/kernels.hpp"
#include "mhr/manifold.hpp"
#include "mhr/matrix_io.hpp"
#include "mhr/model_io.hpp"
#include "mhr/simplex.hpp"
#include "mhr/solvers.hpp"
#include "mhr/synthetic.hpp"
