#include "reidfuse/store.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "reidfuse/error.hpp"

namespace reidfuse {

namespace {

std::string row_prefix(std::size_t row) { return "row " + std::to_string(row) + ": "; }

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string::size_type start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

// Little-endian encode/decode, independent of host byte order.
template <typename T>
void put_le(std::string& out, T value) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
    }
}

template <typename T>
T get_le(const unsigned char* p) {
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        u |= static_cast<U>(static_cast<U>(p[i]) << (8 * i));
    }
    return static_cast<T>(u);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

FeatureSet assemble(const FeatureMatrix& matrix, const std::vector<MetadataRow>& meta, Role role) {
    if (matrix.rows != meta.size()) {
        throw DataError("row count mismatch: matrix has " + std::to_string(matrix.rows) +
                        " rows, metadata has " + std::to_string(meta.size()));
    }
    std::vector<FeatureRecord> records;
    records.reserve(meta.size());
    for (std::size_t i = 0; i < meta.size(); ++i) {
        auto row = matrix.row(i);
        records.push_back({meta[i].item_id, meta[i].person_id, meta[i].camera_id,
                           std::vector<float>(row.begin(), row.end())});
    }
    return FeatureSet(std::move(records), role);
}

}  // namespace

std::string to_string(Role role) {
    switch (role) {
        case Role::Query: return "query";
        case Role::Gallery: return "gallery";
        case Role::Train: return "train";
    }
    return "unknown";
}

Role role_from_string(const std::string& text) {
    if (text == "query") return Role::Query;
    if (text == "gallery") return Role::Gallery;
    if (text == "train") return Role::Train;
    throw UsageError("unknown role '" + text + "'");
}

FeatureSet::FeatureSet(std::vector<FeatureRecord> records, Role role)
    : records_(std::move(records)), role_(role) {
    dim_ = records_.empty() ? 0 : records_.front().feature.size();
    std::unordered_set<std::string> seen;
    seen.reserve(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (r.feature.size() != dim_) {
            throw DataError(row_prefix(i) + "dimension mismatch: expected " + std::to_string(dim_) +
                            ", got " + std::to_string(r.feature.size()));
        }
        for (std::size_t c = 0; c < r.feature.size(); ++c) {
            if (!std::isfinite(r.feature[c])) {
                throw DataError(row_prefix(i) + "non-finite value at component " + std::to_string(c));
            }
        }
        if (r.camera_id < 0) throw DataError(row_prefix(i) + "negative camera_id");
        if (r.item_id.empty()) throw DataError(row_prefix(i) + "empty item_id");
        if (!seen.insert(r.item_id).second) {
            throw DataError(row_prefix(i) + "duplicate item_id '" + r.item_id + "'");
        }
    }
}

const FeatureRecord& FeatureSet::at(std::size_t i) const {
    if (i >= records_.size()) {
        throw UsageError("index " + std::to_string(i) + " out of range (size " +
                         std::to_string(records_.size()) + ")");
    }
    return records_[i];
}

bool CombinationWeights::all_finite() const noexcept {
    return std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(gamma) &&
           std::isfinite(intercept);
}

// --- binary container ------------------------------------------------------

FeatureMatrix read_feature_matrix(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() < kContainerHeaderSize) {
        throw DataError("malformed header: " + path.string() + " is shorter than the header");
    }
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (std::memcmp(p, kContainerMagic, 4) != 0) {
        throw DataError("malformed header: bad magic in " + path.string());
    }
    const auto version = get_le<std::uint32_t>(p + 4);
    if (version != kContainerVersion) {
        throw DataError("malformed header: unsupported container version " + std::to_string(version));
    }
    const auto rows = get_le<std::uint64_t>(p + 8);
    const auto dim = get_le<std::uint32_t>(p + 16);
    const auto scalar = get_le<std::uint32_t>(p + 20);
    if (scalar != kScalarFloat32) {
        throw DataError("malformed header: unsupported scalar code " + std::to_string(scalar));
    }
    const std::uint64_t expected = kContainerHeaderSize + rows * dim * sizeof(float);
    if (dim != 0 && rows > (bytes.size() / dim)) {
        throw DataError("malformed header: row count exceeds file size");
    }
    if (bytes.size() != expected) {
        throw DataError("malformed header: body size " + std::to_string(bytes.size() - kContainerHeaderSize) +
                        " does not match rows*dim*4 = " + std::to_string(expected - kContainerHeaderSize));
    }

    FeatureMatrix m;
    m.rows = rows;
    m.dim = dim;
    m.values.resize(rows * dim);
    const unsigned char* body = p + kContainerHeaderSize;
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        m.values[i] = std::bit_cast<float>(get_le<std::uint32_t>(body + 4 * i));
    }
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.dim; ++c) {
            if (!std::isfinite(m.values[r * m.dim + c])) {
                throw DataError(row_prefix(r) + "non-finite value at component " + std::to_string(c));
            }
        }
    }
    return m;
}

void write_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& matrix) {
    if (matrix.values.size() != matrix.rows * matrix.dim) {
        throw InvariantError("feature matrix value count does not match rows*dim");
    }
    std::string out;
    out.reserve(kContainerHeaderSize + matrix.values.size() * 4);
    out.append(kContainerMagic, 4);
    put_le<std::uint32_t>(out, kContainerVersion);
    put_le<std::uint64_t>(out, matrix.rows);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.dim));
    put_le<std::uint32_t>(out, kScalarFloat32);
    for (float v : matrix.values) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
    write_file(path, out);
}

// --- metadata CSV ----------------------------------------------------------

std::vector<MetadataRow> read_metadata(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    bool header_seen = false;
    std::vector<MetadataRow> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (trim(line) != "item_id,person_id,camera_id") {
                throw DataError("metadata header must be 'item_id,person_id,camera_id' in " + path.string());
            }
            header_seen = true;
            continue;
        }
        auto fields = split(line, ',');
        const std::size_t idx = rows.size();
        if (fields.size() != 3) {
            throw DataError(row_prefix(idx) + "expected 3 metadata fields, got " + std::to_string(fields.size()));
        }
        MetadataRow row;
        row.item_id = trim(fields[0]);
        if (!parse_number(trim(fields[1]), row.person_id)) {
            throw DataError(row_prefix(idx) + "bad person_id '" + fields[1] + "'");
        }
        if (!parse_number(trim(fields[2]), row.camera_id)) {
            throw DataError(row_prefix(idx) + "bad camera_id '" + fields[2] + "'");
        }
        rows.push_back(std::move(row));
    }
    if (!header_seen) throw DataError("metadata file has no header: " + path.string());
    return rows;
}

void write_metadata(const std::filesystem::path& path, std::span<const MetadataRow> rows) {
    std::string out = "item_id,person_id,camera_id\n";
    for (const auto& r : rows) {
        if (r.item_id.find_first_of(",\n\r") != std::string::npos) {
            throw DataError("item_id '" + r.item_id + "' contains a separator");
        }
        out += r.item_id + ',' + std::to_string(r.person_id) + ',' + std::to_string(r.camera_id) + '\n';
    }
    write_file(path, out);
}

FeatureSet load_feature_set(const std::filesystem::path& matrix_path,
                            const std::filesystem::path& metadata_path, Role role) {
    return assemble(read_feature_matrix(matrix_path), read_metadata(metadata_path), role);
}

void save_feature_set(const FeatureSet& set, const std::filesystem::path& matrix_path,
                      const std::filesystem::path& metadata_path) {
    FeatureMatrix m;
    m.rows = set.size();
    m.dim = set.dim();
    m.values.reserve(m.rows * m.dim);
    std::vector<MetadataRow> meta;
    meta.reserve(set.size());
    for (const auto& r : set) {
        m.values.insert(m.values.end(), r.feature.begin(), r.feature.end());
        meta.push_back({r.item_id, r.person_id, r.camera_id});
    }
    write_feature_matrix(matrix_path, m);
    write_metadata(metadata_path, meta);
}

// --- text fixtures ---------------------------------------------------------

FeatureSet parse_feature_set_text(const std::string& text, Role role) {
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    std::size_t dim = 0;
    std::vector<FeatureRecord> records;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line.front() == '#') continue;
        auto fields = split(line, ',');
        if (!header_seen) {
            if (fields.size() < 3 || trim(fields[0]) != "item_id" || trim(fields[1]) != "person_id" ||
                trim(fields[2]) != "camera_id") {
                throw DataError("text feature header must start with 'item_id,person_id,camera_id'");
            }
            dim = fields.size() - 3;
            header_seen = true;
            continue;
        }
        const std::size_t idx = records.size();
        if (fields.size() != dim + 3) {
            throw DataError(row_prefix(idx) + "dimension mismatch: expected " + std::to_string(dim) +
                            " components, got " + std::to_string(fields.size() < 3 ? 0 : fields.size() - 3));
        }
        FeatureRecord r;
        r.item_id = trim(fields[0]);
        if (!parse_number(trim(fields[1]), r.person_id)) throw DataError(row_prefix(idx) + "bad person_id");
        if (!parse_number(trim(fields[2]), r.camera_id)) throw DataError(row_prefix(idx) + "bad camera_id");
        r.feature.resize(dim);
        for (std::size_t c = 0; c < dim; ++c) {
            const std::string cell = trim(fields[3 + c]);
            // from_chars rejects "nan"/"inf" spellings inconsistently; strtof is the fallback
            float v = 0.0f;
            if (!parse_number(cell, v)) {
                char* end = nullptr;
                v = std::strtof(cell.c_str(), &end);
                if (cell.empty() || end != cell.c_str() + cell.size()) {
                    throw DataError(row_prefix(idx) + "bad value '" + cell + "'");
                }
            }
            r.feature[c] = v;
        }
        records.push_back(std::move(r));
    }
    if (!header_seen) throw DataError("text feature set has no header");
    return FeatureSet(std::move(records), role);
}

FeatureSet load_feature_set_text(const std::filesystem::path& path, Role role) {
    return parse_feature_set_text(read_file(path), role);
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw InvariantError("failed to format double");
    return std::string(buf.data(), ptr);
}

// --- weights ---------------------------------------------------------------

std::string format_weights(const CombinationWeights& w) {
    if (!w.all_finite()) throw DataError("refusing to save non-finite weights");
    std::string out;
    out += "format_version=" + std::to_string(kWeightsFormatVersion) + '\n';
    out += "alpha=" + format_double(w.alpha) + '\n';
    out += "beta=" + format_double(w.beta) + '\n';
    out += "gamma=" + format_double(w.gamma) + '\n';
    out += "intercept=" + format_double(w.intercept) + '\n';
    out += "k_used=" + std::to_string(w.k_used) + '\n';
    out += "n_used=" + std::to_string(w.n_used) + '\n';
    out += "seed=" + std::to_string(w.seed) + '\n';
    out += "run_index=" + std::to_string(w.run_index) + '\n';
    out += std::string("ridge_fallback=") + (w.ridge_fallback ? "1" : "0") + '\n';
    return out;
}

CombinationWeights parse_weights(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("weights: malformed line '" + line + "'");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }

    auto require = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw DataError("weights schema error: missing field '" + key + "'");
        return it->second;
    };
    auto as_double = [&](const std::string& key) {
        double v = 0.0;
        if (!parse_number(require(key), v)) throw DataError("weights schema error: bad value for '" + key + "'");
        return v;
    };
    auto as_int = [&](const std::string& key) {
        std::int64_t v = 0;
        if (!parse_number(require(key), v)) throw DataError("weights schema error: bad value for '" + key + "'");
        return v;
    };

    const auto version = as_int("format_version");
    if (version != kWeightsFormatVersion) {
        throw DataError("weights schema version mismatch: expected " + std::to_string(kWeightsFormatVersion) +
                        ", got " + std::to_string(version));
    }
    CombinationWeights w;
    w.alpha = as_double("alpha");
    w.beta = as_double("beta");
    w.gamma = as_double("gamma");
    w.intercept = as_double("intercept");
    w.k_used = as_int("k_used");
    w.n_used = as_int("n_used");
    w.seed = as_int("seed");
    w.run_index = as_int("run_index");
    if (kv.count("ridge_fallback")) w.ridge_fallback = as_int("ridge_fallback") != 0;
    if (!w.all_finite()) throw DataError("weights schema error: non-finite value");
    return w;
}

void save_weights(const CombinationWeights& w, const std::filesystem::path& path) {
    write_file(path, format_weights(w));
}

CombinationWeights load_weights(const std::filesystem::path& path) {
    return parse_weights(read_file(path));
}

}  // namespace reidfuse
