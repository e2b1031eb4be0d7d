#pragma once

#include "robust_scatter/error.hpp"
#include "robust_scatter/scatter_model.hpp"
#include "robust_scatter/dataset_io.hpp"
#include "robust_scatter/random.hpp"
#include "robust_scatter/parallel.hpp"
#include "robust_scatter/samplers.hpp"
#include "robust_scatter/u_function.hpp"
#include "robust_scatter/estimators.hpp"
#include "robust_scatter/master_equation.hpp"
#include "robust_scatter/concentration_lab.hpp"
#include "robust_scatter/simplex.hpp"
#include "robust_scatter/sparse_estimation.hpp"
