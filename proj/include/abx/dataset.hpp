#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abx/types.hpp"

namespace abx {

/// One item: a time span inside a feature file plus its categorical labels.
/// `values` is aligned with the owning LabelTable's columns.
struct ItemRecord {
  std::string file;
  double onset = 0.0;
  double offset = 0.0;
  std::vector<std::string> values;

  friend bool operator==(const ItemRecord&, const ItemRecord&) = default;
};

/// Item labels. A row's position is its item index everywhere downstream.
class LabelTable {
 public:
  LabelTable() = default;
  explicit LabelTable(std::vector<std::string> columns);

  /// Throws ShapeError when the row does not have one value per column.
  void add_row(ItemRecord record);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<ItemRecord>& rows() const { return rows_; }
  const ItemRecord& row(std::size_t i) const { return rows_.at(i); }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  std::optional<std::size_t> find_column(std::string_view name) const;
  /// Throws SpecError for unknown names.
  std::size_t column_index(std::string_view name) const;
  const std::string& value(std::size_t row, std::size_t column) const {
    return rows_[row].values[column];
  }

  /// Attribute name -> value view of one row.
  std::map<std::string, std::string> attributes(std::size_t row) const;

  friend bool operator==(const LabelTable&, const LabelTable&) = default;

 private:
  std::vector<std::string> columns_;
  std::vector<ItemRecord> rows_;
};

/// Reads an item file: header `#file onset offset <attr>...`, then one item
/// per line, fields separated by runs of spaces or tabs. Blank lines are
/// ignored. Throws FormatError on bad header, bad numbers, ragged rows or
/// onset >= offset.
LabelTable parse_item_file(std::istream& in);
LabelTable read_item_file(const std::filesystem::path& path);
void write_item_file(std::ostream& out, const LabelTable& table);

/// Inclusive frame range.
struct FrameSlice {
  std::int64_t start = 0;
  std::int64_t end = -1;

  std::int64_t size() const { return end - start + 1; }
  friend bool operator==(const FrameSlice&, const FrameSlice&) = default;
};

/// Frames whose centre time dt/2 + i*dt falls inside [t_on, t_off]:
/// start = ceil(t_on/dt - 1/2), end = floor(t_off/dt - 1/2). Legacy mode
/// drops the last of those frames, as an exclusive-end slice
/// `features[start:end]` would. Throws EmptySegmentError when nothing is left.
FrameSlice frame_slice(double t_on, double t_off, double dt, bool legacy);

/// True when FASTABX_LEGACY_SLICING is set to 1.
bool legacy_slicing_from_env();

/// Per-file feature matrices sharing one dimension and frame rate.
class FeatureStore {
 public:
  explicit FeatureStore(double frequency);

  /// Throws ShapeError on dim mismatch and DataError on non-finite values.
  void insert(std::string id, FeatureMatrix features);

  bool contains(const std::string& id) const { return matrices_.contains(id); }
  /// Throws IoError naming the id when absent.
  const FeatureMatrix& at(const std::string& id) const;

  std::size_t size() const { return matrices_.size(); }
  Eigen::Index dim() const { return dim_; }
  double frequency() const { return frequency_; }
  double frame_step() const { return 1.0 / frequency_; }

 private:
  std::map<std::string, FeatureMatrix> matrices_;
  std::string dim_owner_;  // first id inserted, named in shape errors
  Eigen::Index dim_ = -1;
  double frequency_;
};

/// Binary layout: "FABX", u32 version (1), u32 rows, u32 cols, then
/// rows*cols little-endian f32, row-major.
void write_feature_file(const std::filesystem::path& path, const FeatureMatrix& features);
void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& features);

/// Reads either format: binary when the file starts with the magic bytes,
/// CSV (one frame per line) otherwise.
FeatureMatrix read_feature_file(const std::filesystem::path& path);

/// Loads `<root>/<id>`, falling back to `<root>/<id>.csv`.
FeatureStore load_features(const std::filesystem::path& root, std::span<const std::string> ids,
                           double frequency);

/// Rows of the item's file selected by frame_slice. Throws BoundsError
/// (carrying `item`) when the slice runs past the matrix.
FeatureMatrix item_segment(const ItemRecord& record, const FeatureStore& store, bool legacy,
                           std::size_t item = 0);

struct SlicingOptions {
  bool legacy = false;
  /// Drop items whose slice is empty instead of throwing.
  bool skip_empty = true;
};

/// Labels plus one feature segment per item.
class Dataset {
 public:
  /// Item i resolves to segments[i]. Throws ShapeError on count or dim mismatch.
  static Dataset from_arrays(LabelTable labels, std::vector<FeatureMatrix> segments);

  /// Slices every item out of the store. Skipped rows are removed from the
  /// resulting labels and reported by skipped_rows().
  static Dataset from_item(const LabelTable& labels, const FeatureStore& store,
                           SlicingOptions options = {});

  const LabelTable& labels() const { return labels_; }
  const FeatureMatrix& segment(ItemIndex i) const { return segments_.at(i); }
  std::size_t size() const { return segments_.size(); }
  Eigen::Index dim() const { return dim_; }
  /// Row positions (in the input table) dropped for empty slices.
  const std::vector<std::size_t>& skipped_rows() const { return skipped_; }

 private:
  LabelTable labels_;
  std::vector<FeatureMatrix> segments_;
  std::vector<std::size_t> skipped_;
  Eigen::Index dim_ = 0;
};

}  // namespace abx
