#pragma once

// Spectral invariants of Drinfeld modules over F_q((1/T)): exact rationals
// and finite-field towers, truncated generalized power series, additive
// polynomials, Newton polygons, the spectrum of the period lattice with its
// filtration and ramification/residue bounds, and a brute-force root-solving
// oracle that cross-checks all of it.

#include "dmspec/addpoly.hpp"
#include "dmspec/analyze.hpp"
#include "dmspec/finite_field.hpp"
#include "dmspec/json_io.hpp"
#include "dmspec/newton.hpp"
#include "dmspec/oracle.hpp"
#include "dmspec/pseries.hpp"
#include "dmspec/rational.hpp"
#include "dmspec/spectral.hpp"
#include "dmspec/tower.hpp"
