#include "bspc/dataset.hpp"

#include "bspc/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace bspc {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string_view> split_char(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

// Nonempty lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string_view>> lines_of(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string_view>> out;
    std::size_t start = 0, number = 0;
    while (start <= text.size()) {
        const auto pos = text.find('\n', start);
        const auto line = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        ++number;
        if (!trim(line).empty()) out.emplace_back(number, line);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_cell(std::string_view cell, std::size_t line, std::size_t column) {
    std::string_view s = trim(cell);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": '" +
                                          std::string(cell) + "' is not a finite number");
    return v;
}

long long parse_int_cell(std::string_view cell, std::size_t line, std::size_t column) {
    const std::string_view s = trim(cell);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": '" +
                                          std::string(cell) + "' is not an integer");
    return v;
}

BatchSet parse_wide(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw Error(ErrorKind::Format, "csv-wide input has no header row");
    const auto header = split_char(lines.front().second, ',');
    std::size_t first_value = 0;
    int id_col = -1, label_col = -1;
    for (std::size_t c = 0; c < header.size() && c < 2; ++c) {
        const std::string name = lower(header[c]);
        if (name == "batch_id" && id_col < 0 && label_col < 0) {
            id_col = static_cast<int>(c);
            first_value = c + 1;
        } else if (name == "label" && label_col < 0) {
            label_col = static_cast<int>(c);
            first_value = c + 1;
        } else {
            break;
        }
    }
    const std::size_t width = header.size();
    BatchSet set;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto [number, line] = lines[r];
        const auto cells = split_char(line, ',');
        if (cells.size() != width)
            throw Error(ErrorKind::Format, "row " + std::to_string(r) + " (line " + std::to_string(number) + ") has " +
                                               std::to_string(cells.size()) + " fields, expected " + std::to_string(width));
        BatchSeries b;
        b.batch_id = id_col >= 0 ? std::string(cells[static_cast<std::size_t>(id_col)]) : std::to_string(r);
        if (label_col >= 0) b.label = normalize_label(cells[static_cast<std::size_t>(label_col)]);
        for (std::size_t c = first_value; c < width; ++c) b.values.push_back(parse_cell(cells[c], number, c + 1));
        set.batches.push_back(std::move(b));
    }
    return set;
}

BatchSet parse_long(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw Error(ErrorKind::Format, "csv-long input has no header row");
    const auto header = split_char(lines.front().second, ',');
    int id_col = -1, t_col = -1, value_col = -1, label_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string name = lower(header[c]);
        if (name == "batch_id") id_col = static_cast<int>(c);
        else if (name == "t") t_col = static_cast<int>(c);
        else if (name == "value") value_col = static_cast<int>(c);
        else if (name == "label") label_col = static_cast<int>(c);
    }
    if (id_col < 0 || t_col < 0 || value_col < 0)
        throw Error(ErrorKind::Format, "csv-long header must name batch_id, t and value columns");

    struct Partial {
        std::string label;
        std::map<long long, double> points;
    };
    std::vector<std::string> order;
    std::unordered_map<std::string, Partial> by_id;
    long long t_min = 0, t_max = 0;
    bool any = false;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto [number, line] = lines[r];
        const auto cells = split_char(line, ',');
        if (cells.size() != header.size())
            throw Error(ErrorKind::Format, "row " + std::to_string(r) + " (line " + std::to_string(number) + ") has " +
                                               std::to_string(cells.size()) + " fields, expected " +
                                               std::to_string(header.size()));
        const std::string id(cells[static_cast<std::size_t>(id_col)]);
        const long long t = parse_int_cell(cells[static_cast<std::size_t>(t_col)], number, static_cast<std::size_t>(t_col) + 1);
        const double v = parse_cell(cells[static_cast<std::size_t>(value_col)], number, static_cast<std::size_t>(value_col) + 1);
        auto [it, inserted] = by_id.try_emplace(id);
        if (inserted) order.push_back(id);
        if (label_col >= 0) it->second.label = normalize_label(cells[static_cast<std::size_t>(label_col)]);
        if (!it->second.points.emplace(t, v).second)
            throw Error(ErrorKind::Format, "batch '" + id + "' repeats t=" + std::to_string(t) + " (line " +
                                               std::to_string(number) + ")");
        t_min = any ? std::min(t_min, t) : t;
        t_max = any ? std::max(t_max, t) : t;
        any = true;
    }
    BatchSet set;
    for (const auto& id : order) {
        const Partial& part = by_id.at(id);
        BatchSeries b;
        b.batch_id = id;
        b.label = part.label;
        for (long long t = t_min; t <= t_max; ++t) {
            const auto it = part.points.find(t);
            if (it == part.points.end())
                throw Error(ErrorKind::Format, "batch '" + id + "' is missing t=" + std::to_string(t));
            b.values.push_back(it->second);
        }
        set.batches.push_back(std::move(b));
    }
    return set;
}

BatchSet parse_labeled(std::string_view text) {
    BatchSet set;
    std::size_t width = 0;
    std::size_t row = 0;
    for (const auto& [number, line] : lines_of(text)) {
        ++row;
        const auto cells = split_ws(line);
        if (row == 1) width = cells.size();
        if (cells.size() != width)
            throw Error(ErrorKind::Format, "row " + std::to_string(row) + " (line " + std::to_string(number) + ") has " +
                                               std::to_string(cells.size()) + " fields, expected " + std::to_string(width));
        if (width < 2) throw Error(ErrorKind::Format, "labeled rows need a label and at least one observation");
        BatchSeries b;
        b.batch_id = std::to_string(row);
        b.label = normalize_label(cells[0]);
        for (std::size_t c = 1; c < cells.size(); ++c) b.values.push_back(parse_cell(cells[c], number, c + 1));
        set.batches.push_back(std::move(b));
    }
    return set;
}

}  // namespace

DataFormat parse_format(std::string_view tag) {
    const std::string t = lower(trim(tag));
    if (t == "csv-wide") return DataFormat::CsvWide;
    if (t == "csv-long") return DataFormat::CsvLong;
    if (t == "labeled-tsv") return DataFormat::LabeledTsv;
    throw Error(ErrorKind::Config, "unknown data format '" + std::string(tag) + "'");
}

std::string_view to_string(DataFormat format) noexcept {
    switch (format) {
        case DataFormat::CsvWide: return "csv-wide";
        case DataFormat::CsvLong: return "csv-long";
        case DataFormat::LabeledTsv: return "labeled-tsv";
    }
    return "csv-wide";
}

std::string normalize_label(std::string_view raw) {
    std::string_view s = trim(raw);
    std::string_view num = s;
    if (!num.empty() && num.front() == '+') num.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (!num.empty() && ec == std::errc() && ptr == num.data() + num.size() && std::isfinite(v) && v == std::floor(v) &&
        std::fabs(v) < 1e15)
        return std::to_string(static_cast<long long>(v));
    return std::string(s);
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

Dataset ingest_text(std::string_view text, DataFormat format, std::string source) {
    Dataset d;
    switch (format) {
        case DataFormat::CsvWide: d.batches = parse_wide(text); break;
        case DataFormat::CsvLong: d.batches = parse_long(text); break;
        case DataFormat::LabeledTsv: d.batches = parse_labeled(text); break;
    }
    d.manifest.source = std::move(source);
    d.manifest.format = format;
    d.manifest.batch_count = d.batches.size();
    d.manifest.series_length = d.batches.series_length();
    d.manifest.has_labels = d.batches.has_labels();
    d.manifest.checksum = fnv1a_hex(text);
    if (d.manifest.has_labels)
        for (const auto& b : d.batches.batches) ++d.manifest.label_counts[b.label];
    return d;
}

Dataset ingest(const std::filesystem::path& path, DataFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Format, "cannot open data file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return ingest_text(buf.str(), format, path.string());
}

std::string format_dataset(const BatchSet& batches, DataFormat format) {
    const std::size_t n = batches.series_length();
    const bool labels = batches.has_labels();
    std::string out;
    switch (format) {
        case DataFormat::CsvWide:
            out += "batch_id";
            if (labels) out += ",label";
            for (std::size_t t = 1; t <= n; ++t) out += ",x" + std::to_string(t);
            out += '\n';
            for (const auto& b : batches.batches) {
                out += b.batch_id;
                if (labels) out += "," + b.label;
                for (double v : b.values) out += "," + format_double(v);
                out += '\n';
            }
            break;
        case DataFormat::CsvLong:
            out += labels ? "batch_id,label,t,value\n" : "batch_id,t,value\n";
            for (const auto& b : batches.batches)
                for (std::size_t t = 0; t < b.values.size(); ++t) {
                    out += b.batch_id;
                    if (labels) out += "," + b.label;
                    out += "," + std::to_string(t + 1) + "," + format_double(b.values[t]) + "\n";
                }
            break;
        case DataFormat::LabeledTsv:
            if (!labels) throw Error(ErrorKind::Format, "labeled-tsv output requires a label on every batch");
            for (const auto& b : batches.batches) {
                out += b.label;
                for (double v : b.values) out += "\t" + format_double(v);
                out += '\n';
            }
            break;
    }
    return out;
}

void write_dataset(const std::filesystem::path& path, const BatchSet& batches, DataFormat format) {
    const std::string text = format_dataset(batches, format);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Format, "cannot write data file '" + path.string() + "'");
    out << text;
}

}  // namespace bspc
