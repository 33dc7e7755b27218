#include "ssstab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <sstream>

#include "ssstab/errors.hpp"
#include "text_util.hpp"

namespace ssstab::grid {

namespace {

using detail::split;
using detail::to_double;
using detail::to_int;
using detail::trim;

constexpr std::complex<double> kJ{0.0, 1.0};

std::string where(const std::string& source, std::size_t line_no) {
  return source + ":" + std::to_string(line_no);
}

double need_double(std::string_view field, const std::string& at, const char* name) {
  const auto v = to_double(field);
  if (!v || !std::isfinite(*v)) {
    throw ParseError(at + ": field '" + name + "' is not a number: '" + std::string(field) + "'");
  }
  return *v;
}

long long need_int(std::string_view field, const std::string& at, const char* name) {
  const auto v = to_int(field);
  if (!v) {
    throw ParseError(at + ": field '" + name + "' is not an integer: '" + std::string(field) + "'");
  }
  return *v;
}

bool need_bool(std::string_view field, const std::string& at, const char* name) {
  if (field == "1" || field == "true" || field == "TRUE") return true;
  if (field == "0" || field == "false" || field == "FALSE") return false;
  throw ParseError(at + ": field '" + name + "' is not a boolean: '" + std::string(field) + "'");
}

void check_contingency(const GridCase& grid_case, const Contingency& contingency) {
  for (const auto idx : contingency.opened) {
    if (idx >= grid_case.branches.size()) {
      throw DomainError("contingency branch index " + std::to_string(idx) + " out of range (" +
                        std::to_string(grid_case.branches.size()) + " branches)");
    }
  }
}

void stamp_branch(CMatrix& y, std::size_t f, std::size_t t, const Branch& br, bool opened) {
  std::complex<double> z{br.r, br.x};
  if (opened) z *= kOpenedImpedanceScale;
  const std::complex<double> ys = 1.0 / z;
  const std::complex<double> ysh{0.0, br.b_shunt / 2.0};
  const auto fi = static_cast<Eigen::Index>(f);
  const auto ti = static_cast<Eigen::Index>(t);
  y(fi, fi) += ys + ysh;
  y(ti, ti) += ys + ysh;
  y(fi, ti) -= ys;
  y(ti, fi) -= ys;
}

double norm1(const CMatrix& m) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) best = std::max(best, m.col(j).cwiseAbs().sum());
  return best;
}

}  // namespace

void GridCase::validate() const {
  if (!(base_mva > 0.0)) throw ValidationError("meta: base_mva must be > 0");
  if (!(omega_syn > 0.0)) throw ValidationError("meta: omega_syn must be > 0");
  if (!(length_scale > 0.0)) throw ValidationError("meta: length_scale must be > 0");
  if (!(base_kv > 0.0)) throw ValidationError("meta: base_kv must be > 0");
  if (buses.empty()) throw ValidationError("case has no buses");

  std::size_t slack_count = 0;
  for (std::size_t i = 0; i < buses.size(); ++i) {
    const auto& b = buses[i];
    const std::string at = "bus row " + std::to_string(i) + " (id " + std::to_string(b.id) + ")";
    if (!(b.voltage_kv > 0.0)) throw ValidationError(at + ": voltage_kv must be > 0");
    for (std::size_t j = 0; j < i; ++j) {
      if (buses[j].id == b.id) throw ValidationError(at + ": duplicate bus id");
    }
    if (b.is_slack) ++slack_count;
  }
  if (slack_count != 1) {
    throw ValidationError("exactly one slack bus required, found " + std::to_string(slack_count));
  }

  for (std::size_t i = 0; i < branches.size(); ++i) {
    const auto& br = branches[i];
    const std::string at = "branch row " + std::to_string(i);
    if (br.index != i) throw ValidationError(at + ": index must be contiguous from 0");
    if (br.from_bus == br.to_bus) throw ValidationError(at + ": from_bus equals to_bus");
    if (br.x == 0.0) throw ValidationError(at + ": reactance x must be nonzero");
    bus_position(br.from_bus);
    bus_position(br.to_bus);
  }

  if (generators.empty()) throw ValidationError("case has no generators");
  for (std::size_t i = 0; i < generators.size(); ++i) {
    const auto& g = generators[i];
    const std::string at = "generator row " + std::to_string(i) + " (bus " + std::to_string(g.bus) + ")";
    if (!(g.inertia_h > 0.0)) throw ValidationError(at + ": h must be > 0");
    if (!(g.xd_transient > 0.0)) throw ValidationError(at + ": xd_t must be > 0");
    if (std::none_of(buses.begin(), buses.end(), [&](const Bus& b) { return b.id == g.bus; })) {
      throw ValidationError(at + ": bus does not exist");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (generators[j].bus == g.bus) throw ValidationError(at + ": duplicate generator bus");
    }
  }
}

std::size_t GridCase::bus_position(int id) const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == id) return i;
  }
  throw ValidationError("unknown bus id " + std::to_string(id));
}

std::complex<double> GridCase::bus_voltage_pu(std::size_t position) const {
  const auto& b = buses.at(position);
  return std::polar(b.voltage_kv / base_kv, b.angle_deg * std::numbers::pi / 180.0);
}

GridCase parse_case(std::istream& in, const std::string& source_name) {
  enum class Section { none, meta, buses, branches, generators };
  GridCase gc;
  Section section = Section::none;
  bool section_has_rows = false;
  bool seen_meta = false, seen_buses = false, seen_branches = false, seen_generators = false;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    const std::string at = where(source_name, line_no);
    if (line.front() == '#') {
      const auto name = line.substr(1);
      if (name.empty() || name.front() == ' ' || name.front() == '\t') continue;  // comment
      section_has_rows = false;
      if (name == "meta") {
        section = Section::meta;
        seen_meta = true;
      } else if (name == "buses") {
        section = Section::buses;
        seen_buses = true;
      } else if (name == "branches") {
        section = Section::branches;
        seen_branches = true;
      } else if (name == "generators") {
        section = Section::generators;
        seen_generators = true;
      } else {
        throw ParseError(at + ": unknown section '" + std::string(line) + "'");
      }
      continue;
    }
    if (section == Section::none) throw ParseError(at + ": data row before any section header");

    const auto f = split(line, ',');
    if (!section_has_rows && !to_double(f[0])) {  // optional header row
      section_has_rows = true;
      continue;
    }
    section_has_rows = true;

    switch (section) {
      case Section::meta: {
        if (f.size() != 3 && f.size() != 4) {
          throw ParseError(at + ": meta row needs base_mva,omega_syn,length_scale[,base_kv]");
        }
        gc.base_mva = need_double(f[0], at, "base_mva");
        gc.omega_syn = need_double(f[1], at, "omega_syn");
        gc.length_scale = need_double(f[2], at, "length_scale");
        if (f.size() == 4) gc.base_kv = need_double(f[3], at, "base_kv");
        break;
      }
      case Section::buses: {
        if (f.size() != 8) throw ParseError(at + ": bus row needs 8 fields, got " + std::to_string(f.size()));
        Bus b;
        b.id = static_cast<int>(need_int(f[0], at, "id"));
        b.voltage_kv = need_double(f[1], at, "voltage_kv");
        b.angle_deg = need_double(f[2], at, "angle_deg");
        b.p_gen = need_double(f[3], at, "p_gen");
        b.q_gen = need_double(f[4], at, "q_gen");
        b.p_load = need_double(f[5], at, "p_load");
        b.q_load = need_double(f[6], at, "q_load");
        b.is_slack = need_bool(f[7], at, "is_slack");
        gc.buses.push_back(b);
        break;
      }
      case Section::branches: {
        if (f.size() != 7) throw ParseError(at + ": branch row needs 7 fields, got " + std::to_string(f.size()));
        Branch br;
        const auto idx = need_int(f[0], at, "index");
        if (idx < 0) throw ParseError(at + ": negative branch index");
        br.index = static_cast<std::size_t>(idx);
        br.from_bus = static_cast<int>(need_int(f[1], at, "from"));
        br.to_bus = static_cast<int>(need_int(f[2], at, "to"));
        br.r = need_double(f[3], at, "r");
        br.x = need_double(f[4], at, "x");
        br.b_shunt = need_double(f[5], at, "b");
        br.is_transformer = need_bool(f[6], at, "is_transformer");
        gc.branches.push_back(br);
        break;
      }
      case Section::generators: {
        if (f.size() != 4) throw ParseError(at + ": generator row needs 4 fields, got " + std::to_string(f.size()));
        Generator g;
        g.bus = static_cast<int>(need_int(f[0], at, "bus"));
        g.inertia_h = need_double(f[1], at, "h");
        g.damping_d = need_double(f[2], at, "d");
        g.xd_transient = need_double(f[3], at, "xd_t");
        gc.generators.push_back(g);
        break;
      }
      case Section::none:
        break;
    }
  }

  if (!seen_meta || !seen_buses || !seen_branches || !seen_generators) {
    throw ParseError(source_name + ": missing section(s); need #meta, #buses, #branches, #generators");
  }
  for (auto& br : gc.branches) {
    br.r *= gc.length_scale;
    br.x *= gc.length_scale;
    br.b_shunt *= gc.length_scale;
  }
  gc.validate();
  compute_emfs(gc);
  return gc;
}

GridCase load_case(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open case file " + path.string());
  return parse_case(in, path.string());
}

std::filesystem::path bundled_case(const std::string& file_name) {
  return std::filesystem::path(SSSTAB_DATA_DIR) / file_name;
}

void compute_emfs(GridCase& gc) {
  for (auto& g : gc.generators) {
    const auto pos = gc.bus_position(g.bus);
    const auto& bus = gc.buses[pos];
    const auto v = gc.bus_voltage_pu(pos);
    const std::complex<double> s{bus.p_gen, bus.q_gen};
    const auto current = std::conj(s / v);
    const auto e = v + kJ * g.xd_transient * current;
    g.emf_mag = std::abs(e);
    g.emf_angle = std::arg(e);
  }
}

CMatrix build_ybus(const GridCase& gc, const Contingency& contingency) {
  check_contingency(gc, contingency);
  const auto n = static_cast<Eigen::Index>(gc.buses.size());
  CMatrix y = CMatrix::Zero(n, n);
  for (const auto& br : gc.branches) {
    stamp_branch(y, gc.bus_position(br.from_bus), gc.bus_position(br.to_bus), br,
                 contingency.contains(br.index));
  }
  return y;
}

CMatrix build_augmented_ybus(const GridCase& gc, const Contingency& contingency) {
  const CMatrix ybus = build_ybus(gc, contingency);
  const auto nb = ybus.rows();
  const auto ng = static_cast<Eigen::Index>(gc.generators.size());
  CMatrix y = CMatrix::Zero(nb + ng, nb + ng);
  y.topLeftCorner(nb, nb) = ybus;
  for (Eigen::Index g = 0; g < ng; ++g) {
    const auto& gen = gc.generators[static_cast<std::size_t>(g)];
    const auto b = static_cast<Eigen::Index>(gc.bus_position(gen.bus));
    const auto i = nb + g;
    const std::complex<double> yg = 1.0 / (kJ * gen.xd_transient);
    y(b, b) += yg;
    y(i, i) += yg;
    y(b, i) -= yg;
    y(i, b) -= yg;
  }
  return y;
}

CVector load_admittances(const GridCase& gc, std::size_t size) {
  if (size < gc.buses.size()) throw ShapeError("load_admittances: size smaller than bus count");
  CVector out = CVector::Zero(static_cast<Eigen::Index>(size));
  for (std::size_t i = 0; i < gc.buses.size(); ++i) {
    const auto& b = gc.buses[i];
    const double vm = std::abs(gc.bus_voltage_pu(i));
    out(static_cast<Eigen::Index>(i)) = std::complex<double>(b.p_load, -b.q_load) / (vm * vm);
  }
  return out;
}

CMatrix kron_reduce(const CMatrix& ybus, std::span<const std::size_t> keep,
                    const CVector& load_adm) {
  const auto n = ybus.rows();
  if (ybus.cols() != n) throw ShapeError("kron_reduce: admittance matrix is not square");
  if (load_adm.size() != n) throw ShapeError("kron_reduce: load vector length mismatch");

  std::vector<bool> kept(static_cast<std::size_t>(n), false);
  for (const auto k : keep) {
    if (k >= static_cast<std::size_t>(n)) throw DomainError("kron_reduce: keep index out of range");
    if (kept[k]) throw DomainError("kron_reduce: duplicate keep index " + std::to_string(k));
    kept[k] = true;
  }
  std::vector<Eigen::Index> k_idx(keep.begin(), keep.end());
  std::vector<Eigen::Index> l_idx;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!kept[static_cast<std::size_t>(i)]) l_idx.push_back(i);
  }

  CMatrix y = ybus;
  y.diagonal() += load_adm;
  const CMatrix ykk = y(k_idx, k_idx);
  if (l_idx.empty()) return ykk;

  const CMatrix yll = y(l_idx, l_idx);
  const CMatrix ykl = y(k_idx, l_idx);
  const CMatrix ylk = y(l_idx, k_idx);
  Eigen::FullPivLU<CMatrix> lu(yll);
  const double n1 = norm1(yll);
  double cond = std::numeric_limits<double>::infinity();
  if (lu.isInvertible()) {
    const CMatrix inv = lu.inverse();
    cond = n1 * norm1(inv);
  }
  if (!std::isfinite(cond) || cond > kSingularCondition) {
    std::ostringstream msg;
    msg << "kron_reduce: interior block is singular (condition estimate " << cond << ")";
    throw SingularInteriorError(msg.str());
  }
  return ykk - ykl * lu.solve(ylk);
}

std::vector<std::vector<int>> islands(const GridCase& gc, const Contingency& contingency) {
  check_contingency(gc, contingency);
  const std::size_t n = gc.buses.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (const auto& br : gc.branches) {
    if (contingency.contains(br.index)) continue;
    const auto a = find(gc.bus_position(br.from_bus));
    const auto b = find(gc.bus_position(br.to_bus));
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<std::size_t, std::vector<int>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(gc.buses[i].id);
  std::vector<std::vector<int>> out;
  for (auto& [root, ids] : groups) out.push_back(std::move(ids));
  return out;
}

Eigen::MatrixXd synchronizing_matrix(const CMatrix& yr, std::span<const double> e,
                                     std::span<const double> delta) {
  const auto g = yr.rows();
  if (yr.cols() != g || e.size() != static_cast<std::size_t>(g) ||
      delta.size() != static_cast<std::size_t>(g)) {
    throw ShapeError("synchronizing_matrix: dimension mismatch");
  }
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(g, g);
  for (Eigen::Index i = 0; i < g; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < g; ++j) {
      if (i == j) continue;
      const double dij = delta[static_cast<std::size_t>(i)] - delta[static_cast<std::size_t>(j)];
      const double v = e[static_cast<std::size_t>(i)] * e[static_cast<std::size_t>(j)] *
                       (yr(i, j).real() * std::sin(dij) - yr(i, j).imag() * std::cos(dij));
      k(i, j) = v;
      row += v;
    }
    k(i, i) = -row;
  }
  return k;
}

Eigen::MatrixXd classical_state_matrix(const Eigen::MatrixXd& k, std::span<const double> h,
                                       std::span<const double> d, double omega_syn) {
  const auto g = k.rows();
  if (k.cols() != g || h.size() != static_cast<std::size_t>(g) ||
      d.size() != static_cast<std::size_t>(g)) {
    throw ShapeError("classical_state_matrix: dimension mismatch");
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * g, 2 * g);
  a.topRightCorner(g, g).setIdentity();
  for (Eigen::Index i = 0; i < g; ++i) {
    const double two_h = 2.0 * h[static_cast<std::size_t>(i)];
    a.row(g + i).head(g) = -(omega_syn / two_h) * k.row(i);
    a(g + i, g + i) = -d[static_cast<std::size_t>(i)] / two_h;
  }
  return a;
}

SystemMatrix linearize_classical(const GridCase& gc, const Contingency& contingency) {
  const auto groups = islands(gc, contingency);
  if (groups.size() > 1) {
    std::ostringstream msg;
    msg << "islanding contingency: network splits into " << groups.size() << " parts";
    throw SingularInteriorError(msg.str());
  }
  const CMatrix y = build_augmented_ybus(gc, contingency);
  const std::size_t nb = gc.buses.size();
  const std::size_t ng = gc.generators.size();
  std::vector<std::size_t> keep(ng);
  std::iota(keep.begin(), keep.end(), nb);
  const CMatrix yr = kron_reduce(y, keep, load_admittances(gc, nb + ng));

  std::vector<double> e, delta, h, d;
  for (const auto& gen : gc.generators) {
    e.push_back(gen.emf_mag);
    delta.push_back(gen.emf_angle);
    h.push_back(gen.inertia_h);
    d.push_back(gen.damping_d);
  }
  SystemMatrix sm;
  sm.a = classical_state_matrix(synchronizing_matrix(yr, e, delta), h, d, gc.omega_syn);
  for (const auto& gen : gc.generators) sm.state_names.push_back("delta_" + std::to_string(gen.bus));
  for (const auto& gen : gc.generators) sm.state_names.push_back("omega_" + std::to_string(gen.bus));
  return sm;
}

}  // namespace ssstab::grid
