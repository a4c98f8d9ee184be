#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace reidfuse {

enum class Role { Query, Gallery, Train };

std::string to_string(Role role);
Role role_from_string(const std::string& text);

/// One image: its embedding plus identity and camera labels.
/// A negative person_id marks a distractor / unknown identity.
struct FeatureRecord {
    std::string item_id;
    int person_id = -1;
    int camera_id = 0;
    std::vector<float> feature;

    bool operator==(const FeatureRecord&) const = default;
};

/// Immutable, validated collection of FeatureRecords sharing one dimension.
///
/// Construction checks every invariant (shared dimension, finite values,
/// non-negative camera ids, unique item ids); once built, a FeatureSet only
/// exposes const access and is safe to read from any number of threads.
class FeatureSet {
public:
    FeatureSet() = default;
    FeatureSet(std::vector<FeatureRecord> records, Role role);

    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    std::size_t dim() const noexcept { return dim_; }
    Role role() const noexcept { return role_; }

    const FeatureRecord& operator[](std::size_t i) const { return records_[i]; }
    const FeatureRecord& at(std::size_t i) const;
    std::span<const float> feature(std::size_t i) const { return records_[i].feature; }

    const std::vector<FeatureRecord>& records() const noexcept { return records_; }
    auto begin() const noexcept { return records_.begin(); }
    auto end() const noexcept { return records_.end(); }

    bool operator==(const FeatureSet&) const = default;

private:
    std::vector<FeatureRecord> records_;
    std::size_t dim_ = 0;
    Role role_ = Role::Gallery;
};

/// Learned combination weights. The intercept is recorded for audit and is
/// never added to a score.
struct CombinationWeights {
    double alpha = 1.0;
    double beta = 0.0;
    double gamma = 0.0;
    double intercept = 0.0;
    std::int64_t k_used = 0;
    std::int64_t n_used = 0;
    std::int64_t seed = 0;
    /// Index of the repeat that produced these weights; -1 for an aggregate
    /// (mean over repeats) or for hand-set weights.
    std::int64_t run_index = -1;
    /// Set when the least-squares solve fell back to ridge regularisation.
    bool ridge_fallback = false;

    bool all_finite() const noexcept;
    bool operator==(const CombinationWeights&) const = default;
};

// --- binary feature container -------------------------------------------
//
// Little-endian layout:
//   offset  size  field
//   0       4     magic "URFB"
//   4       4     format version (uint32, currently 1)
//   8       8     row count (uint64)
//   16      4     dim (uint32)
//   20      4     scalar code (uint32, 1 = float32)
//   24      ...   rows * dim float32 values, row-major

inline constexpr char kContainerMagic[4] = {'U', 'R', 'F', 'B'};
inline constexpr std::uint32_t kContainerVersion = 1;
inline constexpr std::uint32_t kScalarFloat32 = 1;
inline constexpr std::size_t kContainerHeaderSize = 24;

struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<float> values;  // row-major

    std::span<const float> row(std::size_t i) const {
        return std::span<const float>(values).subspan(i * dim, dim);
    }
};

FeatureMatrix read_feature_matrix(const std::filesystem::path& path);
void write_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& matrix);

struct MetadataRow {
    std::string item_id;
    int person_id = -1;
    int camera_id = 0;
};

/// Reads `item_id,person_id,camera_id` CSV. Lines starting with '#' are skipped.
std::vector<MetadataRow> read_metadata(const std::filesystem::path& path);
void write_metadata(const std::filesystem::path& path, std::span<const MetadataRow> rows);

/// Loads a FeatureSet from a binary container and its metadata CSV.
FeatureSet load_feature_set(const std::filesystem::path& matrix_path,
                            const std::filesystem::path& metadata_path, Role role);
void save_feature_set(const FeatureSet& set, const std::filesystem::path& matrix_path,
                      const std::filesystem::path& metadata_path);

/// Text fixture format: header `item_id,person_id,camera_id,f0,f1,...`, one
/// record per line.
FeatureSet load_feature_set_text(const std::filesystem::path& path, Role role);
FeatureSet parse_feature_set_text(const std::string& text, Role role);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

// --- weights file --------------------------------------------------------

inline constexpr int kWeightsFormatVersion = 1;

std::string format_weights(const CombinationWeights& w);
CombinationWeights parse_weights(const std::string& text);
void save_weights(const CombinationWeights& w, const std::filesystem::path& path);
CombinationWeights load_weights(const std::filesystem::path& path);

}  // namespace reidfuse
