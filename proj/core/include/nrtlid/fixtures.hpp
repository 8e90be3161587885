#ifndef NRTLID_FIXTURES_HPP
#define NRTLID_FIXTURES_HPP

#include <vector>

#include "nrtlid/thermo.hpp"

namespace nrtlid {

// Built-in synthetic mixtures. Coefficients are plausible for the named
// systems but are NOT databank values; they exist so tests and example
// configurations are self-contained.

Mixture fixture_ethbenz();   // ethanol/benzene-like, pressure-maximum azeotrope
Mixture fixture_acechlo();   // acetone/chloroform-like, pressure-minimum azeotrope
Mixture fixture_methwat();   // methanol/water-like, zeotropic

std::vector<Mixture> fixture_mixtures();

}  // namespace nrtlid

#endif
