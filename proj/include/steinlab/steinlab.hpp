#pragma once

// Umbrella header: certified decision of the annulus-bundle Stein criterion
// m * log rho(M) <= 2 pi^2, with the constructive side results (explicit
// extension series, growth witnesses, margin enumeration, and the 4-d
// counterexample domain pipeline).

#include "steinlab/actions.hpp"
#include "steinlab/analytic.hpp"
#include "steinlab/domain4.hpp"
#include "steinlab/errors.hpp"
#include "steinlab/int_matrix.hpp"
#include "steinlab/int_polynomial.hpp"
#include "steinlab/interval.hpp"
#include "steinlab/json_io.hpp"
#include "steinlab/qlp.hpp"
#include "steinlab/roots.hpp"
#include "steinlab/spectra.hpp"
#include "steinlab/steinness.hpp"
#include "steinlab/szenum.hpp"
#include "steinlab/version.hpp"
