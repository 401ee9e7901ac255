#ifndef RADON_IO_HPP
#define RADON_IO_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "radon/decomposition.hpp"
#include "radon/dyadic.hpp"
#include "radon/geometry.hpp"
#include "radon/sparse.hpp"

namespace radon {

// flat key = value config with # comments
struct Config {
  std::map<std::string, std::string> kv;

  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const { return kv.count(key) > 0; }
  std::string str(const std::string& key, const std::string& def = "") const;
  double num(const std::string& key, double def) const;
  int integer(const std::string& key, int def) const;
};

// deterministic number formatting shared by every report writer
std::string fmt(double v);

struct Summary {
  std::vector<std::pair<std::string, std::string>> rows;
  void put(const std::string& key, const std::string& v) {
    rows.push_back({key, v});
  }
  void put(const std::string& key, double v) { put(key, fmt(v)); }
  void put(const std::string& key, bool v) {
    put(key, std::string(v ? "pass" : "FAIL"));
  }
  void write(std::ostream& os) const;
  bool all_pass() const;
};

void write_system(std::ostream& os, const GradedFieldSystem& sys);
GradedFieldSystem parse_system(std::istream& is);

void write_grid_dump(std::ostream& os, const DyadicGrid& G);
void write_sparse_family(std::ostream& os, const SparseFamily& fam,
                         const std::string& grid_id);
void write_whitney(std::ostream& os, const DyadicGrid& G,
                   const WhitneyFamily& fam);
void write_cz(std::ostream& os, const DyadicGrid& G, const CzResult& r);

}  // namespace radon

#endif
