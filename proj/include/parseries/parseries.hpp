#pragma once

#include "parseries/covariance_models.hpp"
#include "parseries/errors.hpp"
#include "parseries/experiments.hpp"
#include "parseries/haar_moments.hpp"
#include "parseries/io.hpp"
#include "parseries/likelihoods.hpp"
#include "parseries/linalg.hpp"
#include "parseries/projection_kernels.hpp"
#include "parseries/sampling.hpp"
