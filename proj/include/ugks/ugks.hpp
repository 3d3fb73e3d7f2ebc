#pragma once

#include "ugks/boundary.hpp"
#include "ugks/coefficients.hpp"
#include "ugks/error.hpp"
#include "ugks/flux.hpp"
#include "ugks/mesh.hpp"
#include "ugks/penalized.hpp"
#include "ugks/quadrature.hpp"
#include "ugks/reference.hpp"
#include "ugks/state.hpp"
#include "ugks/stepper.hpp"
#include "ugks/tridiagonal.hpp"
