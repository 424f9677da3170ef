#pragma once

// System manifests: an INI file naming the Matrix Market files of a model.
//
//   [system]
//   name = convdiff
//   A = A.mtx        ; coordinate storage -> sparse A, array storage -> dense A
//   B = B.mtx        ; optional, q = 0 when absent
//   C = C.mtx
//   x0 = x0.mtx      ; optional, zero when absent
//   N = 1600         ; optional consistency checks
//   p = 9
//   q = 0
//
// Relative paths are resolved against the manifest's directory.

#include <filesystem>
#include <map>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "icmor/core/lti_system.hpp"
#include "icmor/io/matrix_market.hpp"

namespace icmor::io {

namespace fs = std::filesystem;

inline boost::property_tree::ptree read_ini(const fs::path& path) {
  if (!fs::exists(path)) throw Error("io", "manifest not found: " + path.string());
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error("io", std::string("malformed manifest: ") + e.what());
  }
  return tree;
}

inline fs::path resolve(const fs::path& base, const std::string& entry) {
  fs::path p(entry);
  return p.is_absolute() ? p : base / p;
}

inline LtiSystem load_system(const fs::path& manifest) {
  const auto tree = read_ini(manifest);
  const fs::path base = manifest.parent_path();
  const auto a_file = tree.get_optional<std::string>("system.A");
  const auto c_file = tree.get_optional<std::string>("system.C");
  if (!a_file || !c_file)
    throw Error("io", "manifest " + manifest.string() + " must name system.A and system.C");

  const fs::path a_path = resolve(base, *a_file);
  StateMatrix a = is_coordinate_file(a_path) ? StateMatrix(read_sparse(a_path))
                                             : StateMatrix(read_dense(a_path));
  const Index n = a.size();
  Matrix c = read_dense(resolve(base, *c_file));
  Matrix b = Matrix::Zero(n, 0);
  if (auto b_file = tree.get_optional<std::string>("system.B")) b = read_dense(resolve(base, *b_file));
  Vector x0 = Vector::Zero(n);
  if (auto x_file = tree.get_optional<std::string>("system.x0")) x0 = read_vector(resolve(base, *x_file));

  auto check = [&](const char* key, Index actual) {
    if (auto expect = tree.get_optional<Index>(std::string("system.") + key); expect && *expect != actual)
      throw Error("io", std::string("manifest declares ") + key + " = " + std::to_string(*expect) +
                            " but the files give " + std::to_string(actual));
  };
  check("N", n);
  check("p", c.rows());
  check("q", b.cols());
  try {
    return LtiSystem(std::move(a), std::move(b), std::move(c), std::move(x0));
  } catch (const std::invalid_argument& e) {
    throw Error("io", std::string("inconsistent system files: ") + e.what());
  }
}

/// Writes A (coordinate if sparse, array if dense), B, C, x0 and a manifest
/// into `dir`. Extra key/value pairs go into the [system] section.
inline fs::path save_system(const fs::path& dir, const LtiSystem& sys, const std::string& name,
                            const std::map<std::string, std::string>& extra = {}) {
  fs::create_directories(dir);
  if (sys.A().is_sparse())
    write_sparse(dir / "A.mtx", sys.A().sparse());
  else
    write_dense(dir / "A.mtx", sys.A().dense());
  write_dense(dir / "C.mtx", sys.C());
  write_dense(dir / "x0.mtx", sys.x0());
  boost::property_tree::ptree tree;
  tree.put("system.name", name);
  tree.put("system.A", "A.mtx");
  if (sys.q() > 0) {
    write_dense(dir / "B.mtx", sys.B());
    tree.put("system.B", "B.mtx");
  }
  tree.put("system.C", "C.mtx");
  tree.put("system.x0", "x0.mtx");
  tree.put("system.N", sys.N());
  tree.put("system.p", sys.p());
  tree.put("system.q", sys.q());
  for (const auto& [k, v] : extra) tree.put("system." + k, v);
  const fs::path manifest = dir / "manifest.ini";
  boost::property_tree::ini_parser::write_ini(manifest.string(), tree);
  return manifest;
}

}  // namespace icmor::io
