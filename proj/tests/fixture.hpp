#pragma once

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "pv5/complex.hpp"

namespace pv5::test {

inline const nlohmann::json& oracle() {
  static const nlohmann::json data = [] {
    std::ifstream f(PV5_ORACLE_FIXTURE);
    if (!f) throw std::runtime_error("missing fixture " PV5_ORACLE_FIXTURE);
    return nlohmann::json::parse(f);
  }();
  return data;
}

inline Complex cx(const nlohmann::json& j) { return {j[0].get<double>(), j[1].get<double>()}; }

inline double rel(Complex got, Complex want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

}  // namespace pv5::test
