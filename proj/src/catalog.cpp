#include "mmcache/catalog.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mmcache/csv.hpp"
#include "mmcache/rng.hpp"

namespace mmcache::catalog {

namespace {

struct ClassRow {
  ModalityClass cls;
  Modality modality;
  const char* name;
  QosRequirement qos;
};

// Bandwidth requirements per class; classes specified only by an upper bound
// ("up to X") get min = max/10.
constexpr double kMbps = 1e6;
constexpr double kKbps = 1e3;

const std::array<ClassRow, kModalityClassCount>& class_table() {
  static const std::array<ClassRow, kModalityClassCount> table = {{
      {ModalityClass::video_1080p_30fps, Modality::video, "video_1080p_30fps", {8 * kMbps, 15 * kMbps, 0.100}},
      {ModalityClass::video_1080p_60fps, Modality::video, "video_1080p_60fps", {12 * kMbps, 24 * kMbps, 0.100}},
      {ModalityClass::video_4k_30fps, Modality::video, "video_4k_30fps", {25 * kMbps, 50 * kMbps, 0.100}},
      {ModalityClass::video_4k_60fps, Modality::video, "video_4k_60fps", {50 * kMbps, 100 * kMbps, 0.100}},
      {ModalityClass::video_8k_30fps, Modality::video, "video_8k_30fps", {100 * kMbps, 150 * kMbps, 0.100}},
      {ModalityClass::video_8k_60fps, Modality::video, "video_8k_60fps", {150 * kMbps, 200 * kMbps, 0.100}},
      {ModalityClass::audio_mp3, Modality::audio, "audio_mp3", {64 * kKbps, 320 * kKbps, 0.100}},
      {ModalityClass::audio_bluray, Modality::audio, "audio_bluray", {44.8 * kKbps, 448 * kKbps, 0.010}},
      {ModalityClass::audio_home_theater, Modality::audio, "audio_home_theater", {1 * kMbps, 6 * kMbps, 0.050}},
      {ModalityClass::haptic_low_fidelity, Modality::haptic, "haptic_low_fidelity", {10 * kKbps, 100 * kKbps, 0.010}},
      {ModalityClass::haptic_high_fidelity, Modality::haptic, "haptic_high_fidelity", {100 * kKbps, 1 * kMbps, 0.001}},
  }};
  return table;
}

const ClassRow& row_of(ModalityClass cls) {
  for (const auto& row : class_table())
    if (row.cls == cls) return row;
  throw std::invalid_argument("unknown modality class");
}

}  // namespace

const Content& Catalog::by_id(std::int64_t id) const {
  const auto it = std::lower_bound(contents.begin(), contents.end(), id,
                                   [](const Content& c, std::int64_t v) { return c.id < v; });
  if (it == contents.end() || it->id != id)
    throw std::out_of_range("unknown content id " + std::to_string(id));
  return *it;
}

bool Catalog::has_id(std::int64_t id) const {
  const auto it = std::lower_bound(contents.begin(), contents.end(), id,
                                   [](const Content& c, std::int64_t v) { return c.id < v; });
  return it != contents.end() && it->id == id;
}

QosRequirement qos_profile(ModalityClass cls) { return row_of(cls).qos; }

QosRequirement qos_profile(const std::string& class_name) {
  return qos_profile(parse_modality_class(class_name));
}

Modality modality_of(ModalityClass cls) { return row_of(cls).modality; }

const std::string& modality_class_name(ModalityClass cls) {
  static const std::array<std::string, kModalityClassCount> names = [] {
    std::array<std::string, kModalityClassCount> out;
    for (const auto& row : class_table()) out[static_cast<int>(row.cls)] = row.name;
    return out;
  }();
  return names[static_cast<int>(cls)];
}

ModalityClass parse_modality_class(const std::string& name) {
  for (const auto& row : class_table())
    if (name == row.name) return row.cls;
  throw std::invalid_argument("unknown modality class: '" + name + "'");
}

const std::string& modality_name(Modality m) {
  static const std::array<std::string, 3> names = {"video", "audio", "haptic"};
  return names[static_cast<int>(m)];
}

Modality parse_modality(const std::string& name) {
  if (name == "video") return Modality::video;
  if (name == "audio") return Modality::audio;
  if (name == "haptic") return Modality::haptic;
  throw std::invalid_argument("unknown modality: '" + name + "'");
}

const std::vector<ModalityClass>& classes_of(Modality m) {
  static const std::array<std::vector<ModalityClass>, 3> lists = [] {
    std::array<std::vector<ModalityClass>, 3> out;
    for (const auto& row : class_table()) out[static_cast<int>(row.modality)].push_back(row.cls);
    return out;
  }();
  return lists[static_cast<int>(m)];
}

Catalog build_catalog(const CatalogSpec& spec) {
  if (spec.count < 0) throw std::invalid_argument("build_catalog: negative count");
  const double mix_sum = spec.video_fraction + spec.audio_fraction + spec.haptic_fraction;
  if (std::fabs(mix_sum - 1.0) > 1e-9)
    throw std::invalid_argument("build_catalog: modality mix must sum to 1");

  // Largest-remainder apportionment of count over the three modalities.
  const std::array<double, 3> fracs = {spec.video_fraction, spec.audio_fraction, spec.haptic_fraction};
  std::array<std::int64_t, 3> counts{};
  std::array<double, 3> remainders{};
  std::int64_t assigned = 0;
  for (int m = 0; m < 3; ++m) {
    const double exact = static_cast<double>(spec.count) * fracs[m];
    counts[m] = static_cast<std::int64_t>(std::floor(exact));
    remainders[m] = exact - static_cast<double>(counts[m]);
    assigned += counts[m];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainders[a] > remainders[b]; });
  for (std::int64_t left = spec.count - assigned, i = 0; left > 0; --left, ++i) counts[order[i % 3]] += 1;

  const std::array<std::pair<std::int64_t, std::int64_t>, 3> size_ranges = {{
      {spec.video_size_min_bytes, spec.video_size_max_bytes},
      {spec.audio_size_min_bytes, spec.audio_size_max_bytes},
      {spec.haptic_size_min_bytes, spec.haptic_size_max_bytes},
  }};

  Rng rng(derive_seed(spec.seed, 0xCA7A106ULL));
  std::vector<Content> drafts;
  drafts.reserve(static_cast<std::size_t>(spec.count));
  for (int m = 0; m < 3; ++m) {
    const auto& classes = classes_of(static_cast<Modality>(m));
    const auto [lo, hi] = size_ranges[m];
    if (lo <= 0 || lo > hi) throw std::invalid_argument("build_catalog: bad size range");
    for (std::int64_t i = 0; i < counts[m]; ++i) {
      Content c;
      c.modality = static_cast<Modality>(m);
      c.modality_class = classes[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(classes.size()) - 1))];
      c.size_bytes = rng.uniform_int(lo, hi);
      c.qos = qos_profile(c.modality_class);
      drafts.push_back(c);
    }
  }
  rng.shuffle(drafts);

  Catalog cat;
  cat.contents = std::move(drafts);
  for (std::size_t i = 0; i < cat.contents.size(); ++i) cat.contents[i].id = static_cast<std::int64_t>(i) + 1;
  cat.next_id = spec.count + 1;
  return cat;
}

const Content& release_content(Catalog& cat, ModalityClass cls, std::int64_t size_bytes) {
  if (size_bytes <= 0) throw std::invalid_argument("release_content: size must be positive");
  Content c;
  c.id = cat.next_id++;
  c.modality_class = cls;
  c.modality = modality_of(cls);
  c.size_bytes = size_bytes;
  c.qos = qos_profile(cls);
  cat.contents.push_back(c);
  return cat.contents.back();
}

void write_catalog_csv(const Catalog& cat, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "id,modality,modality_class,size_bytes,min_bw_bps,max_bw_bps,max_latency_s\n";
  for (const auto& c : cat.contents) {
    out << c.id << ',' << modality_name(c.modality) << ',' << modality_class_name(c.modality_class) << ','
        << c.size_bytes << ',' << fmt_double(c.qos.min_bandwidth_bps) << ',' << fmt_double(c.qos.max_bandwidth_bps)
        << ',' << fmt_double(c.qos.max_latency_s) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Catalog read_catalog_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for read: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty catalog file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "id,modality,modality_class,size_bytes,min_bw_bps,max_bw_bps,max_latency_s")
    throw std::runtime_error("bad catalog header in " + path);

  Catalog cat;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw std::runtime_error("bad catalog row: '" + line + "'");
    Content c;
    c.id = parse_i64(f[0]);
    c.modality = parse_modality(f[1]);
    c.modality_class = parse_modality_class(f[2]);
    c.size_bytes = parse_i64(f[3]);
    c.qos.min_bandwidth_bps = parse_double(f[4]);
    c.qos.max_bandwidth_bps = parse_double(f[5]);
    c.qos.max_latency_s = parse_double(f[6]);
    cat.contents.push_back(c);
  }
  std::sort(cat.contents.begin(), cat.contents.end(), [](const Content& a, const Content& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < cat.contents.size(); ++i)
    if (cat.contents[i].id == cat.contents[i - 1].id)
      throw std::runtime_error("duplicate content id in " + path);
  cat.next_id = cat.contents.empty() ? 1 : cat.contents.back().id + 1;
  return cat;
}

}  // namespace mmcache::catalog
