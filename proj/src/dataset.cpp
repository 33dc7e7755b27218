#include "ssstab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "ssstab/errors.hpp"
#include "ssstab/rng.hpp"
#include "text_util.hpp"

namespace ssstab::dataset {

namespace {

constexpr double kUnitTol = 1e-12;

std::array<std::vector<std::size_t>, modal::kLabelCount> rows_by_class(const Dataset& ds) {
  std::array<std::vector<std::size_t>, modal::kLabelCount> out;
  for (std::size_t i = 0; i < ds.size(); ++i) out[modal::label_index(ds.labels[i])].push_back(i);
  return out;
}

std::vector<std::size_t> shuffled(std::vector<std::size_t> rows, std::uint64_t seed) {
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(rows));
  return rows;
}

}  // namespace

ClassCounts Dataset::class_counts() const {
  ClassCounts c{};
  for (const auto l : labels) ++c[modal::label_index(l)];
  return c;
}

Dataset Dataset::select(std::span<const std::size_t> rows) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), 2);
  out.labels.reserve(rows.size());
  out.zeta_pct.reserve(rows.size());
  out.scenario_id.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i];
    if (r >= size()) throw DomainError("select: row index out of range");
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(r));
    out.labels.push_back(labels[r]);
    out.zeta_pct.push_back(zeta_pct[r]);
    out.scenario_id.push_back(scenario_id[r]);
  }
  return out;
}

void Dataset::validate() const {
  const auto n = labels.size();
  if (static_cast<std::size_t>(features.rows()) != n || features.cols() != 2 ||
      zeta_pct.size() != n || scenario_id.size() != n) {
    throw ShapeError("dataset: column lengths disagree");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (std::hypot(features(r, 0), features(r, 1)) > 1.0 + kUnitTol) {
      throw ValidationError("dataset row " + std::to_string(i) + ": eigenvalue outside the unit circle");
    }
  }
}

Dataset assemble(std::span<const DampingRecord> records) {
  if (records.empty()) throw DomainError("assemble: no records");
  Dataset ds;
  ds.features.resize(static_cast<Eigen::Index>(records.size()), 2);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.eig.magnitude() > 1.0 + kUnitTol) {
      throw ValidationError("assemble: record " + std::to_string(i) +
                            " is not normalized (|eig| > 1)");
    }
    ds.features(static_cast<Eigen::Index>(i), 0) = rec.eig.sigma;
    ds.features(static_cast<Eigen::Index>(i), 1) = rec.eig.omega;
    ds.labels.push_back(rec.label);
    ds.zeta_pct.push_back(rec.zeta_pct);
    ds.scenario_id.push_back(rec.scenario_id);
  }
  return ds;
}

Dataset balance(const Dataset& ds, std::uint64_t seed) {
  const auto counts = ds.class_counts();
  std::string missing;
  for (std::size_t c = 0; c < modal::kLabelCount; ++c) {
    if (counts[c] == 0) {
      if (!missing.empty()) missing += ", ";
      missing += std::string(modal::label_name(modal::kLabelOrder[c]));
    }
  }
  if (!missing.empty()) throw ValidationError("balance: missing classes: " + missing);

  const auto target = *std::min_element(counts.begin(), counts.end());
  const auto groups = rows_by_class(ds);
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < modal::kLabelCount; ++c) {
    auto rows = shuffled(groups[c], sub_seed(seed, c));
    rows.resize(target);
    keep.insert(keep.end(), rows.begin(), rows.end());
  }
  std::sort(keep.begin(), keep.end());
  return ds.select(keep);
}

std::vector<int> encode_index(std::span<const StabilityLabel> labels) {
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto l : labels) out.push_back(static_cast<int>(modal::label_index(l)));
  return out;
}

std::vector<StabilityLabel> decode_index(std::span<const int> indices) {
  std::vector<StabilityLabel> out;
  out.reserve(indices.size());
  for (const auto i : indices) {
    if (i < 0) throw DomainError("decode_index: negative label index");
    out.push_back(modal::label_from_index(static_cast<std::size_t>(i)));
  }
  return out;
}

Eigen::MatrixXd encode_one_hot(std::span<const StabilityLabel> labels) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()),
                                              static_cast<Eigen::Index>(modal::kLabelCount));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(modal::label_index(labels[i]))) = 1.0;
  }
  return out;
}

Eigen::MatrixXd deskew(const Eigen::MatrixXd& features, bool enabled) {
  if (!enabled) return features;
  return features.unaryExpr([](double v) { return std::copysign(std::log1p(std::abs(v)), v); });
}

std::vector<std::size_t> stratified_quota(std::span<const std::size_t> sizes, double fraction) {
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  const auto want = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
  std::vector<std::size_t> quota(sizes.size());
  std::vector<double> rem(sizes.size());
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    const double exact = fraction * static_cast<double>(sizes[c]);
    quota[c] = std::min(sizes[c], static_cast<std::size_t>(std::floor(exact)));
    rem[c] = exact - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  std::vector<std::size_t> order(sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t i = 0; assigned < want && i < order.size(); ++i) {
    if (quota[order[i]] < sizes[order[i]]) {
      ++quota[order[i]];
      ++assigned;
    }
  }
  return quota;
}

Split split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw DomainError("split: train_fraction must be in (0, 1)");
  }
  const auto groups = rows_by_class(ds);
  std::vector<std::size_t> sizes;
  for (const auto& g : groups) {
    if (g.size() == 1) throw DomainError("split: every present class needs at least 2 rows");
    sizes.push_back(g.size());
  }
  auto quota = stratified_quota(sizes, train_fraction);

  Split out;
  out.train_fraction = train_fraction;
  for (std::size_t c = 0; c < modal::kLabelCount; ++c) {
    if (groups[c].empty()) continue;
    quota[c] = std::clamp<std::size_t>(quota[c], 1, groups[c].size() - 1);
    const auto rows = shuffled(groups[c], sub_seed(seed, c));
    out.train_rows.insert(out.train_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(quota[c]));
    out.test_rows.insert(out.test_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(quota[c]), rows.end());
  }
  std::sort(out.train_rows.begin(), out.train_rows.end());
  std::sort(out.test_rows.begin(), out.test_rows.end());
  out.train = ds.select(out.train_rows);
  out.test = ds.select(out.test_rows);
  return out;
}

Dataset subsample(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw DomainError("subsample: fraction must be in (0, 1]");
  if (fraction == 1.0) return ds;
  const auto groups = rows_by_class(ds);
  std::vector<std::size_t> sizes;
  for (const auto& g : groups) sizes.push_back(g.size());
  const auto quota = stratified_quota(sizes, fraction);
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < modal::kLabelCount; ++c) {
    auto rows = shuffled(groups[c], sub_seed(seed, c));
    rows.resize(quota[c]);
    keep.insert(keep.end(), rows.begin(), rows.end());
  }
  std::sort(keep.begin(), keep.end());
  return ds.select(keep);
}

void write_csv(std::ostream& out, const Dataset& ds) {
  out << "re,im,zeta_pct,label,scenario_id\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out << detail::fmt17(ds.features(r, 0)) << ',' << detail::fmt17(ds.features(r, 1)) << ','
        << detail::fmt17(ds.zeta_pct[i]) << ',' << modal::label_name(ds.labels[i]) << ','
        << ds.scenario_id[i] << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_csv(out, ds);
}

Dataset read_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(source + ": empty dataset file");
  ++line_no;
  if (detail::trim(line) != "re,im,zeta_pct,label,scenario_id") {
    throw ParseError(source + ":1: expected header re,im,zeta_pct,label,scenario_id");
  }
  std::vector<double> re, im;
  Dataset ds;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const std::string at = source + ":" + std::to_string(line_no);
    const auto f = detail::split(line, ',');
    if (f.size() != 5) throw ParseError(at + ": expected 5 fields");
    const auto a = detail::to_double(f[0]);
    const auto b = detail::to_double(f[1]);
    const auto z = detail::to_double(f[2]);
    const auto s = detail::to_int(f[4]);
    if (!a || !b || !z || !s) throw ParseError(at + ": malformed numeric field");
    try {
      ds.labels.push_back(modal::parse_label(f[3]));
    } catch (const ParseError& e) {
      throw ParseError(at + ": " + e.what());
    }
    re.push_back(*a);
    im.push_back(*b);
    ds.zeta_pct.push_back(*z);
    ds.scenario_id.push_back(*s);
  }
  ds.features.resize(static_cast<Eigen::Index>(re.size()), 2);
  for (std::size_t i = 0; i < re.size(); ++i) {
    ds.features(static_cast<Eigen::Index>(i), 0) = re[i];
    ds.features(static_cast<Eigen::Index>(i), 1) = im[i];
  }
  ds.validate();
  return ds;
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open dataset " + path.string());
  return read_csv(in, path.string());
}

std::vector<DampingRecord> synthetic_records(const SyntheticConfig& cfg, std::uint64_t seed) {
  if (!(cfg.r_min > 0.0 && cfg.r_max > cfg.r_min)) throw DomainError("synthetic: need 0 < r_min < r_max");
  cfg.thresholds.validate();
  const auto& t = cfg.thresholds;
  struct Band {
    StabilityLabel label;
    double lo, hi;
  };
  const std::array<Band, 5> bands = {{{StabilityLabel::satisfactory, t.good_max_pct, 100.0},
                                      {StabilityLabel::good, t.acceptable_max_pct, t.good_max_pct},
                                      {StabilityLabel::acceptable, t.critical_max_pct, t.acceptable_max_pct},
                                      {StabilityLabel::critical, 0.0, t.critical_max_pct},
                                      {StabilityLabel::unstable, -100.0, 0.0}}};
  const double log_lo = std::log(cfg.r_min);
  const double log_hi = std::log(cfg.r_max);
  std::vector<DampingRecord> out;
  std::int64_t id = 0;
  for (const auto& band : bands) {
    Rng rng(sub_seed(seed, modal::label_index(band.label)));
    for (std::size_t i = 0; i < cfg.per_class; ++i) {
      const double zeta = rng.uniform(band.lo, band.hi) / 100.0;
      const double r = std::exp(rng.uniform(log_lo, log_hi));
      const double sign = (rng.next() & 1U) ? 1.0 : -1.0;
      const modal::ComplexEigenvalue eig{-r * zeta, sign * r * std::sqrt(1.0 - zeta * zeta)};
      out.push_back(modal::make_record(eig, t, id++));
    }
  }
  if (t.irrelevant_is_real_axis) {
    Rng rng(sub_seed(seed, modal::label_index(StabilityLabel::irrelevant)));
    for (std::size_t i = 0; i < cfg.per_class; ++i) {
      const double r = std::exp(rng.uniform(log_lo, log_hi));
      out.push_back(modal::make_record({-r, 0.0}, t, id++));
    }
  }
  return out;
}

}  // namespace ssstab::dataset
