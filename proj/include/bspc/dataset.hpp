#pragma once

#include "bspc/arma.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace bspc {

/// csv-wide:    header row, one batch per row; optional leading `batch_id` and `label` columns.
/// csv-long:    header with `batch_id`, `t`, `value` (and optional `label`), one observation per row.
/// labeled-tsv: no header; class label first, then the T observations, tab or space separated.
enum class DataFormat { CsvWide, CsvLong, LabeledTsv };

DataFormat parse_format(std::string_view tag);
std::string_view to_string(DataFormat format) noexcept;

struct DatasetManifest {
    std::string source;
    DataFormat format = DataFormat::CsvWide;
    bool has_labels = false;
    std::size_t batch_count = 0;
    std::size_t series_length = 0;
    std::string checksum; ///< FNV-1a 64 of the raw bytes, hex
    std::map<std::string, std::size_t> label_counts;
};

struct Dataset {
    BatchSet batches;
    DatasetManifest manifest;
};

Dataset ingest(const std::filesystem::path& path, DataFormat format);
Dataset ingest_text(std::string_view text, DataFormat format, std::string source = "<memory>");

std::string format_dataset(const BatchSet& batches, DataFormat format);
void write_dataset(const std::filesystem::path& path, const BatchSet& batches, DataFormat format);

/// "+1", "1.0000000e+00" and "1" all normalize to "1".
std::string normalize_label(std::string_view raw);

std::string fnv1a_hex(std::string_view bytes);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

}  // namespace bspc
