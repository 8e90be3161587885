#include "nrtlid/fixtures.hpp"

namespace nrtlid {

namespace {

PureComponent ethanol_like() {
  return {"ethanol-like", 513.92, 6.148e6, {-8.51838, 0.34163, -5.73683, 8.32581}, 250.0, 513.92};
}
PureComponent benzene_like() {
  return {"benzene-like", 562.05, 4.895e6, {-6.98273, 1.33213, -2.62863, -3.33399}, 278.0, 562.05};
}
PureComponent acetone_like() {
  return {"acetone-like", 508.10, 4.700e6, {-7.45514, 1.20200, -2.43926, -3.35590}, 259.0, 508.10};
}
PureComponent chloroform_like() {
  return {"chloroform-like", 536.40, 5.472e6, {-6.95546, 1.16625, -2.13970, -3.44421}, 260.0, 536.40};
}
PureComponent methanol_like() {
  return {"methanol-like", 512.64, 8.097e6, {-8.54796, 0.76982, -3.10850, 1.54481}, 257.0, 512.64};
}
PureComponent water_like() {
  return {"water-like", 647.14, 2.2064e7, {-7.77224, 1.45684, -2.71942, -1.41336}, 275.0, 647.14};
}

}  // namespace

Mixture fixture_ethbenz() {
  Mixture m;
  m.component1 = ethanol_like();
  m.component2 = benzene_like();
  m.nrtl = {0.568, -54.8, -0.915, 882.0, 0.3};
  m.label = "ethbenz";
  m.azeotrope = AzeotropeType::PressureMax;
  return m;
}

Mixture fixture_acechlo() {
  Mixture m;
  m.component1 = acetone_like();
  m.component2 = chloroform_like();
  m.nrtl = {-0.2, -150.0, 0.15, -200.0, 0.3};
  m.label = "acechlo";
  m.azeotrope = AzeotropeType::PressureMin;
  return m;
}

Mixture fixture_methwat() {
  Mixture m;
  m.component1 = methanol_like();
  m.component2 = water_like();
  m.nrtl = {-0.7, 180.0, 2.7, -620.0, 0.3};
  m.label = "methwat";
  m.azeotrope = AzeotropeType::None;
  return m;
}

std::vector<Mixture> fixture_mixtures() {
  return {fixture_ethbenz(), fixture_acechlo(), fixture_methwat()};
}

}  // namespace nrtlid
