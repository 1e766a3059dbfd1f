#pragma once

#include "nctorus/element.hpp"
#include "nctorus/errors.hpp"
#include "nctorus/functional_calculus.hpp"
#include "nctorus/harmonic_flow.hpp"
#include "nctorus/io.hpp"
#include "nctorus/linear_solvers.hpp"
#include "nctorus/nonlinear_solvers.hpp"
#include "nctorus/parallel.hpp"
#include "nctorus/random.hpp"
#include "nctorus/representation.hpp"
