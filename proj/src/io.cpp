#include "radon/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace radon {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config c;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string k = trim(line.substr(0, eq));
    std::string v = trim(line.substr(eq + 1));
    if (!k.empty()) c.kv[k] = v;
  }
  return c;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_string(ss.str());
}

std::string Config::str(const std::string& key, const std::string& def) const {
  auto it = kv.find(key);
  return it == kv.end() ? def : it->second;
}

double Config::num(const std::string& key, double def) const {
  auto it = kv.find(key);
  if (it == kv.end()) return def;
  return std::stod(it->second);
}

int Config::integer(const std::string& key, int def) const {
  auto it = kv.find(key);
  if (it == kv.end()) return def;
  return std::stoi(it->second);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void Summary::write(std::ostream& os) const {
  for (const auto& [k, v] : rows) os << k << " = " << v << "\n";
}

bool Summary::all_pass() const {
  for (const auto& [k, v] : rows)
    if (v == "FAIL") return false;
  return true;
}

void write_system(std::ostream& os, const GradedFieldSystem& sys) {
  const int n = sys.dim();
  os << "gradedsystem\n";
  os << "dim " << n << "\n";
  os << "box";
  for (int i = 0; i < n; ++i) os << " " << fmt(sys.box.lo[i]) << " " << fmt(sys.box.hi[i]);
  os << "\n";
  os << "fields " << sys.size() << "\n";
  for (const auto& g : sys.fields) {
    if (!g.field.is_poly())
      throw ContractViolation("write_system: only polynomial fields serialize");
    os << "field degree " << g.degree << "\n";
    for (int i = 0; i < n; ++i) {
      const auto& terms = g.field.poly[i].terms();
      os << "  comp " << i << " terms " << terms.size();
      for (const auto& t : terms) {
        os << "  ";
        for (int v = 0; v < n; ++v) os << Poly::exp_of(t.key, v) << " ";
        os << fmt(t.c);
      }
      os << "\n";
    }
  }
}

GradedFieldSystem parse_system(std::istream& is) {
  std::string tok;
  is >> tok;
  if (tok != "gradedsystem") throw std::runtime_error("parse_system: bad header");
  int n = 0;
  is >> tok >> n;
  GradedFieldSystem sys;
  sys.box.lo = Vec(n);
  sys.box.hi = Vec(n);
  is >> tok;
  for (int i = 0; i < n; ++i) is >> sys.box.lo[i] >> sys.box.hi[i];
  int nf = 0;
  is >> tok >> nf;
  for (int f = 0; f < nf; ++f) {
    int deg = 0;
    is >> tok >> tok >> deg;
    PolyMap comps(n);
    for (int i = 0; i < n; ++i) {
      int ci = 0;
      size_t nt = 0;
      is >> tok >> ci >> tok >> nt;
      Poly p;
      for (size_t t = 0; t < nt; ++t) {
        std::vector<int> exps(n);
        for (int v = 0; v < n; ++v) is >> exps[v];
        double c = 0;
        is >> c;
        p = p + Poly::monomial(exps, c);
      }
      comps[i] = p;
    }
    sys.fields.push_back({VectorField::from_poly(n, std::move(comps)), deg, false});
  }
  sys.validate();
  return sys;
}

void write_grid_dump(std::ostream& os, const DyadicGrid& G) {
  os << "dyadicgrid delta " << fmt(G.delta) << " scale " << fmt(G.scale)
     << " outer_c " << fmt(G.outer_c) << " eps " << fmt(G.eps) << " seed "
     << G.seed << "\n";
  const auto& S = *G.sht;
  for (int k = G.k_min; k <= G.k_max; ++k) {
    for (uint32_t qi : G.gen_cubes[k - G.k_min]) {
      const DyadicCube& Q = G.cubes[qi];
      os << k << " " << Q.rank << " ";
      for (int i = 0; i < S.lattice.dim; ++i) os << fmt(S.pts[Q.center][i]) << " ";
      os << Q.members.size() << " ";
      if (Q.parent < 0)
        os << "-\n";
      else
        os << G.cubes[Q.parent].generation << ":" << G.cubes[Q.parent].rank << "\n";
    }
  }
}

void write_sparse_family(std::ostream& os, const SparseFamily& fam,
                         const std::string& grid_id) {
  const DyadicGrid& G = *fam.grid;
  const auto& S = *G.sht;
  os << "sparsefamily sigma " << fmt(fam.sigma) << " grid " << grid_id
     << " cubes " << fam.cubes.size() << "\n";
  for (size_t i = 0; i < fam.cubes.size(); ++i) {
    const DyadicCube& Q = G.cubes[fam.cubes[i]];
    double ew = 0;
    for (uint32_t p : fam.witnesses[i]) ew += S.weights[p];
    os << Q.generation << ":" << Q.rank << " gen " << Q.generation << " center";
    for (int d = 0; d < S.lattice.dim; ++d) os << " " << fmt(S.pts[Q.center][d]);
    os << " mu " << fmt(Q.measure) << " muE " << fmt(ew) << "\n";
  }
}

void write_whitney(std::ostream& os, const DyadicGrid& G,
                   const WhitneyFamily& fam) {
  os << "whitney c_prime " << fmt(fam.c_prime) << " cubes " << fam.cubes.size()
     << " covers " << (fam.covers ? 1 : 0) << " disjoint "
     << (fam.disjoint ? 1 : 0) << " bounds " << (fam.bounds_ok ? 1 : 0) << "\n";
  for (uint32_t qi : fam.cubes) {
    const DyadicCube& Q = G.cubes[qi];
    os << Q.generation << ":" << Q.rank << " members " << Q.members.size()
       << "\n";
  }
}

void write_cz(std::ostream& os, const DyadicGrid& G, const CzResult& r) {
  os << "czresult lambda " << fmt(r.lambda) << " c_x " << fmt(r.c_x)
     << " cubes " << r.cubes.size() << "\n";
  for (size_t i = 0; i < r.cubes.size(); ++i) {
    const DyadicCube& Q = G.cubes[r.cubes[i]];
    os << Q.generation << ":" << Q.rank << " bad_l1 "
       << fmt(r.bad_parts[i].lp_norm(1.0)) << " bad_mean "
       << fmt(r.bad_parts[i].integral()) << "\n";
  }
}

}  // namespace radon
