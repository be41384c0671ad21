#pragma once

#include "twostep/certify.hpp"
#include "twostep/errors.hpp"
#include "twostep/estimate.hpp"
#include "twostep/io.hpp"
#include "twostep/iterate.hpp"
#include "twostep/laverage.hpp"
#include "twostep/linalg.hpp"
#include "twostep/problem.hpp"
#include "twostep/problems.hpp"
#include "twostep/quadrature.hpp"
#include "twostep/radius.hpp"
#include "twostep/sampling.hpp"
#include "twostep/verify.hpp"
