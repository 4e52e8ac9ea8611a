#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "ovf/serialization.hpp"

namespace test {

inline ovf::VectorFieldTable instance(std::size_t atoms, std::uint64_t seed, bool twist = true,
                                      bool random_weights = false) {
  return ovf::assemble(ovf::make_spec(atoms, "mixed", seed, twist, random_weights));
}

inline std::string data_path(const std::string& name) {
  return std::string(OVF_TEST_DATA_DIR) + "/" + name;
}

inline ovf::ScalarFieldProfile profile(const std::string& name) {
  std::ifstream in(data_path(name + ".json"));
  std::stringstream ss;
  ss << in.rdbuf();
  return ovf::io::profile_from_json(ovf::io::parse(ss.str()));
}

}  // namespace test
