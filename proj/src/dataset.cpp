#include "abx/dataset.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <set>
#include <sstream>

#include "abx/errors.hpp"
#include "abx/format.hpp"

namespace abx {

namespace {

constexpr std::array<char, 4> kMagic = {'F', 'A', 'B', 'X'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 16;

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

std::uint32_t load_u32(const char* p) {
  std::uint32_t v = 0;
  for (int b = 3; b >= 0; --b) v = (v << 8) | static_cast<unsigned char>(p[b]);
  return v;
}

void store_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

FeatureMatrix parse_binary(const std::string& bytes, const std::filesystem::path& path) {
  if (bytes.size() < kHeaderBytes)
    throw FormatError(path.string() + ": truncated feature header");
  const std::uint32_t version = load_u32(bytes.data() + 4);
  if (version != kVersion)
    throw FormatError(path.string() + ": unsupported feature file version " + std::to_string(version));
  const std::uint32_t rows = load_u32(bytes.data() + 8);
  const std::uint32_t cols = load_u32(bytes.data() + 12);
  const std::uint64_t expected = kHeaderBytes + std::uint64_t{rows} * cols * 4;
  if (bytes.size() != expected)
    throw FormatError(path.string() + ": expected " + std::to_string(expected) + " bytes for a " +
                      std::to_string(rows) + "x" + std::to_string(cols) + " matrix, found " +
                      std::to_string(bytes.size()));
  FeatureMatrix m(rows, cols);
  const char* p = bytes.data() + kHeaderBytes;
  for (Eigen::Index i = 0; i < m.size(); ++i, p += 4) m.data()[i] = std::bit_cast<float>(load_u32(p));
  return m;
}

FeatureMatrix parse_csv(const std::string& text, const std::filesystem::path& path) {
  std::vector<std::vector<float>> frames;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<float> frame;
    std::string_view rest = line;
    for (;;) {
      const auto comma = rest.find(',');
      const std::string field = trim(rest.substr(0, comma));
      float v = 0.0f;
      if (!parse_number(field, v))
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": not a number: '" + field + "'");
      frame.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!frames.empty() && frame.size() != frames.front().size())
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(frames.front().size()) + " values, found " + std::to_string(frame.size()));
    frames.push_back(std::move(frame));
  }
  if (frames.empty()) throw FormatError(path.string() + ": no frames");
  FeatureMatrix m(static_cast<Eigen::Index>(frames.size()), static_cast<Eigen::Index>(frames.front().size()));
  for (std::size_t i = 0; i < frames.size(); ++i)
    for (std::size_t j = 0; j < frames[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = frames[i][j];
  return m;
}

}  // namespace

LabelTable::LabelTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void LabelTable::add_row(ItemRecord record) {
  if (record.values.size() != columns_.size())
    throw ShapeError("row " + std::to_string(rows_.size()) + ": expected " + std::to_string(columns_.size()) +
                     " attribute values, found " + std::to_string(record.values.size()));
  rows_.push_back(std::move(record));
}

std::optional<std::size_t> LabelTable::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i] == name) return i;
  return std::nullopt;
}

std::size_t LabelTable::column_index(std::string_view name) const {
  if (auto i = find_column(name)) return *i;
  throw SpecError("unknown attribute '" + std::string(name) + "'");
}

std::map<std::string, std::string> LabelTable::attributes(std::size_t row) const {
  std::map<std::string, std::string> out;
  for (std::size_t c = 0; c < columns_.size(); ++c) out.emplace(columns_[c], rows_.at(row).values[c]);
  return out;
}

LabelTable parse_item_file(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> columns;
  bool have_header = false;

  LabelTable table;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_whitespace(line);
    if (!have_header) {
      if (fields.size() < 3 || fields[0] != "#file" || fields[1] != "onset" || fields[2] != "offset")
        throw FormatError("line " + std::to_string(line_no) + ": header must start with '#file onset offset'");
      if (fields.size() < 4)
        throw FormatError("line " + std::to_string(line_no) + ": header has no attribute columns");
      std::set<std::string_view> seen;
      for (std::size_t i = 3; i < fields.size(); ++i) {
        if (!seen.insert(fields[i]).second)
          throw FormatError("line " + std::to_string(line_no) + ": duplicate column '" + std::string(fields[i]) + "'");
        columns.emplace_back(fields[i]);
      }
      table = LabelTable(columns);
      have_header = true;
      continue;
    }
    if (fields.empty()) continue;

    const std::string where = "line " + std::to_string(line_no) + " (row " + std::to_string(table.size()) + ")";
    if (fields.size() != columns.size() + 3)
      throw FormatError(where + ": expected " + std::to_string(columns.size() + 3) + " fields, found " +
                        std::to_string(fields.size()));
    ItemRecord record;
    record.file = std::string(fields[0]);
    if (!parse_number(fields[1], record.onset) || !std::isfinite(record.onset))
      throw FormatError(where + ": bad onset '" + std::string(fields[1]) + "'");
    if (!parse_number(fields[2], record.offset) || !std::isfinite(record.offset))
      throw FormatError(where + ": bad offset '" + std::string(fields[2]) + "'");
    if (record.onset < 0.0)
      throw FormatError(where + ": negative onset");
    if (!(record.onset < record.offset))
      throw FormatError(where + ": onset " + std::string(fields[1]) + " is not before offset " +
                        std::string(fields[2]));
    for (std::size_t i = 3; i < fields.size(); ++i) record.values.emplace_back(fields[i]);
    table.add_row(std::move(record));
  }
  if (!have_header) throw FormatError("line 1: missing header");
  return table;
}

LabelTable read_item_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open item file " + path.string());
  try {
    return parse_item_file(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_item_file(std::ostream& out, const LabelTable& table) {
  out << "#file onset offset";
  for (const auto& c : table.columns()) out << ' ' << c;
  out << '\n';
  for (const auto& row : table.rows()) {
    out << row.file << ' ' << format_decimal(row.onset) << ' ' << format_decimal(row.offset);
    for (const auto& v : row.values) out << ' ' << v;
    out << '\n';
  }
}

FrameSlice frame_slice(double t_on, double t_off, double dt, bool legacy) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DataError("frame step must be positive");
  if (!(t_on >= 0.0) || !(t_on < t_off))
    throw DataError("invalid time span [" + format_decimal(t_on) + ", " + format_decimal(t_off) + "]");
  FrameSlice slice;
  slice.start = static_cast<std::int64_t>(std::ceil(t_on / dt - 0.5));
  slice.end = static_cast<std::int64_t>(std::floor(t_off / dt - 0.5));
  if (legacy) --slice.end;
  if (slice.end < slice.start)
    throw EmptySegmentError(slice.start, slice.end,
                            "empty segment: frames " + std::to_string(slice.start) + ".." + std::to_string(slice.end));
  return slice;
}

bool legacy_slicing_from_env() {
  const char* v = std::getenv("FASTABX_LEGACY_SLICING");
  return v != nullptr && std::string_view(v) == "1";
}

FeatureStore::FeatureStore(double frequency) : frequency_(frequency) {
  if (!(frequency > 0.0) || !std::isfinite(frequency)) throw SpecError("feature frequency must be positive");
}

void FeatureStore::insert(std::string id, FeatureMatrix features) {
  if (!features.allFinite()) throw DataError("features of '" + id + "' contain non-finite values");
  if (dim_ < 0) {
    dim_ = features.cols();
    dim_owner_ = id;
  } else if (features.cols() != dim_) {
    throw ShapeError("dimension mismatch: '" + dim_owner_ + "' has " + std::to_string(dim_) + ", '" + id + "' has " +
                     std::to_string(features.cols()));
  }
  matrices_.insert_or_assign(std::move(id), std::move(features));
}

const FeatureMatrix& FeatureStore::at(const std::string& id) const {
  auto it = matrices_.find(id);
  if (it == matrices_.end()) throw IoError("no features for '" + id + "'");
  return it->second;
}

void write_feature_file(const std::filesystem::path& path, const FeatureMatrix& features) {
  std::string bytes(kMagic.begin(), kMagic.end());
  store_u32(bytes, kVersion);
  store_u32(bytes, static_cast<std::uint32_t>(features.rows()));
  store_u32(bytes, static_cast<std::uint32_t>(features.cols()));
  for (Eigen::Index i = 0; i < features.size(); ++i) store_u32(bytes, std::bit_cast<std::uint32_t>(features.data()[i]));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& features) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      if (j) out << ',';
      out << format_decimal(features(i, j));
    }
    out << '\n';
  }
}

FeatureMatrix read_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() >= kMagic.size() && std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) == 0)
    return parse_binary(bytes, path);
  return parse_csv(bytes, path);
}

FeatureStore load_features(const std::filesystem::path& root, std::span<const std::string> ids, double frequency) {
  FeatureStore store(frequency);
  for (const auto& id : ids) {
    if (store.contains(id)) continue;
    std::filesystem::path path = root / id;
    if (!std::filesystem::is_regular_file(path)) {
      path = root / (id + ".csv");
      if (!std::filesystem::is_regular_file(path))
        throw IoError("no feature file for '" + id + "' under " + root.string());
    }
    store.insert(id, read_feature_file(path));
  }
  return store;
}

FeatureMatrix item_segment(const ItemRecord& record, const FeatureStore& store, bool legacy, std::size_t item) {
  const FeatureMatrix& features = store.at(record.file);
  FrameSlice slice;
  try {
    slice = frame_slice(record.onset, record.offset, store.frame_step(), legacy);
  } catch (const EmptySegmentError& e) {
    throw EmptySegmentError(e.start(), e.end(), "item " + std::to_string(item) + ": " + e.what());
  }
  if (slice.end >= features.rows())
    throw BoundsError(item, "item " + std::to_string(item) + ": frames " + std::to_string(slice.start) + ".." +
                                std::to_string(slice.end) + " exceed the " + std::to_string(features.rows()) +
                                " frames of '" + record.file + "'");
  return features.middleRows(slice.start, slice.size());
}

Dataset Dataset::from_arrays(LabelTable labels, std::vector<FeatureMatrix> segments) {
  if (labels.size() != segments.size())
    throw ShapeError(std::to_string(labels.size()) + " labels but " + std::to_string(segments.size()) + " segments");
  Dataset ds;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (s.rows() < 1) throw ShapeError("segment " + std::to_string(i) + " has no frames");
    if (i > 0 && s.cols() != segments.front().cols())
      throw ShapeError("segment " + std::to_string(i) + " has dimension " + std::to_string(s.cols()) + ", expected " +
                       std::to_string(segments.front().cols()));
    if (!s.allFinite()) throw DataError("segment " + std::to_string(i) + " contains non-finite values");
  }
  ds.dim_ = segments.empty() ? 0 : segments.front().cols();
  ds.labels_ = std::move(labels);
  ds.segments_ = std::move(segments);
  return ds;
}

Dataset Dataset::from_item(const LabelTable& labels, const FeatureStore& store, SlicingOptions options) {
  Dataset ds;
  ds.labels_ = LabelTable(labels.columns());
  ds.dim_ = store.dim() < 0 ? 0 : store.dim();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    try {
      ds.segments_.push_back(item_segment(labels.row(i), store, options.legacy, i));
    } catch (const EmptySegmentError&) {
      if (!options.skip_empty) throw;
      ds.skipped_.push_back(i);
      continue;
    }
    ds.labels_.add_row(labels.row(i));
  }
  return ds;
}

}  // namespace abx
