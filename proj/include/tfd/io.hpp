#pragma once

#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tfd/core.hpp"
#include "tfd/detect.hpp"
#include "tfd/nn/model.hpp"

namespace tfd::io {

enum class DatasetFormat { Csv, Ndjson };

inline DatasetFormat format_from_path(const std::string& path) {
  std::filesystem::path p(path);
  std::string ext = p.extension().string();
  if (ext == ".csv") return DatasetFormat::Csv;
  if (ext == ".ndjson" || ext == ".jsonl" || ext == ".json") return DatasetFormat::Ndjson;
  fail(ErrorKind::ParseError, "cannot infer dataset format from '" + path + "'");
}

/// Writes via a temp file in the same directory, then renames into place.
inline void atomic_write(const std::string& path, const std::string& contents) {
  std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::IoError, "cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail(ErrorKind::IoError, "short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, target);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace detail {

inline std::vector<std::string> split_line(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  for (;;) {
    std::size_t end = line.find(sep, begin);
    if (end == std::string::npos) {
      out.push_back(line.substr(begin));
      return out;
    }
    out.push_back(line.substr(begin, end - begin));
    begin = end + 1;
  }
}

inline std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& token, std::size_t line_no) {
  std::string t = strip(token);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    fail(ErrorKind::ParseError,
         "line " + std::to_string(line_no) + ": '" + token + "' is not a number");
  return value;
}

}  // namespace detail

/// One series per file. Header: timestamp,value[,value_2,...,value_D][,label]
/// with rows in ascending timestamp order. Timestamp values beyond their
/// ordering are discarded; the sampling grid is the row index.
inline TimeSeries ingest_csv(const std::string& path) {
  std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail(ErrorKind::ParseError, "empty file '" + path + "'");
  ++line_no;
  std::vector<std::string> header = detail::split_line(detail::strip(line), ',');
  if (header.empty() || detail::strip(header[0]) != "timestamp")
    fail(ErrorKind::ParseError, "line 1: header must start with 'timestamp'");
  bool has_label = header.size() >= 2 && detail::strip(header.back()) == "label";
  const std::size_t dims = header.size() - 1 - (has_label ? 1 : 0);
  if (dims == 0) fail(ErrorKind::ParseError, "line 1: no value columns in header");
  for (std::size_t d = 0; d < dims; ++d) {
    std::string name = detail::strip(header[1 + d]);
    std::string want = d == 0 ? "value" : "value_" + std::to_string(d + 1);
    if (name != want)
      fail(ErrorKind::ParseError, "line 1: expected column '" + want + "', got '" + name + "'");
  }

  std::vector<std::vector<double>> rows(dims);
  std::vector<std::uint8_t> labels;
  double prev_ts = 0.0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    std::string stripped = detail::strip(line);
    if (stripped.empty()) continue;
    std::vector<std::string> cells = detail::split_line(stripped, ',');
    if (cells.size() != header.size())
      fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                      std::to_string(header.size()) + " cells, got " +
                                      std::to_string(cells.size()));
    double ts = detail::parse_double(cells[0], line_no);
    if (!first && !(ts > prev_ts))
      fail(ErrorKind::NonMonotonicTimestamps,
           "line " + std::to_string(line_no) + ": timestamp " + cells[0] + " not increasing");
    prev_ts = ts;
    first = false;
    for (std::size_t d = 0; d < dims; ++d)
      rows[d].push_back(detail::parse_double(cells[1 + d], line_no));
    if (has_label) {
      double lv = detail::parse_double(cells.back(), line_no);
      if (lv != 0.0 && lv != 1.0)
        fail(ErrorKind::ParseError,
             "line " + std::to_string(line_no) + ": label must be 0 or 1");
      labels.push_back(lv == 1.0 ? 1 : 0);
    }
  }
  TimeSeries series;
  series.id = std::filesystem::path(path).stem().string();
  series.values = Matrix::from_rows(rows);
  series.labels = std::move(labels);
  return validate_series(std::move(series));
}

/// One JSON object per line: {"id": ..., "values": [...] or [[...], ...]
/// (dimension-major), "labels": [...]} with labels optional.
inline std::vector<TimeSeries> ingest_ndjson(const std::string& path) {
  std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  std::vector<TimeSeries> out;
  std::size_t record = 0;
  while (std::getline(in, line)) {
    std::string stripped = detail::strip(line);
    if (stripped.empty()) continue;
    ++record;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(stripped);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::ParseError, "record " + std::to_string(record) + ": " + e.what());
    }
    try {
      TimeSeries series;
      series.id = j.value("id", "series_" + std::to_string(record));
      if (!j.contains("values"))
        fail(ErrorKind::ParseError, "record " + std::to_string(record) + ": missing 'values'");
      const auto& values = j["values"];
      if (!values.is_array() || values.empty())
        fail(ErrorKind::ParseError,
             "record " + std::to_string(record) + ": 'values' must be a nonempty array");
      std::vector<std::vector<double>> rows;
      if (values[0].is_array()) {
        for (const auto& row : values) rows.push_back(row.get<std::vector<double>>());
      } else {
        rows.push_back(values.get<std::vector<double>>());
      }
      series.values = Matrix::from_rows(rows);
      if (j.contains("labels")) {
        for (const auto& v : j["labels"]) {
          long lv = v.get<long>();
          if (lv != 0 && lv != 1)
            fail(ErrorKind::ParseError,
                 "record " + std::to_string(record) + ": labels must be 0 or 1");
          series.labels.push_back(static_cast<std::uint8_t>(lv));
        }
      }
      out.push_back(validate_series(std::move(series)));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::ParseError, "record " + std::to_string(record) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<TimeSeries> ingest(const std::string& path, DatasetFormat format) {
  if (format == DatasetFormat::Csv) return {ingest_csv(path)};
  return ingest_ndjson(path);
}

inline std::vector<TimeSeries> ingest(const std::string& path) {
  return ingest(path, format_from_path(path));
}

inline void write_ndjson(const std::string& path, const std::vector<TimeSeries>& dataset) {
  std::string out;
  for (const TimeSeries& s : dataset) {
    nlohmann::json j;
    j["id"] = s.id;
    nlohmann::json values = nlohmann::json::array();
    for (std::size_t d = 0; d < s.dims(); ++d) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t t = 0; t < s.length(); ++t) row.push_back(s.values(d, t));
      values.push_back(row);
    }
    j["values"] = values;
    if (s.has_labels()) {
      nlohmann::json labels = nlohmann::json::array();
      for (auto v : s.labels) labels.push_back(static_cast<int>(v));
      j["labels"] = labels;
    }
    out += j.dump();
    out += '\n';
  }
  atomic_write(path, out);
}

namespace detail {

struct BinaryWriter {
  std::string buf;

  void u64(std::uint64_t v) {
    char b[8];
    std::memcpy(b, &v, 8);
    buf.append(b, 8);
  }
  void f64(double v) {
    char b[8];
    std::memcpy(b, &v, 8);
    buf.append(b, 8);
  }
  void tensor(const nn::Tensor& t) {
    u64(t.shape.size());
    for (std::size_t d : t.shape) u64(d);
    for (double v : t.data) f64(v);
  }
};

struct BinaryReader {
  const std::string& buf;
  std::size_t pos = 0;

  std::uint64_t u64() {
    if (pos + 8 > buf.size()) fail(ErrorKind::ParseError, "truncated checkpoint");
    std::uint64_t v;
    std::memcpy(&v, buf.data() + pos, 8);
    pos += 8;
    return v;
  }
  double f64() {
    if (pos + 8 > buf.size()) fail(ErrorKind::ParseError, "truncated checkpoint");
    double v;
    std::memcpy(&v, buf.data() + pos, 8);
    pos += 8;
    return v;
  }
  nn::Tensor tensor() {
    std::size_t rank = u64();
    if (rank > 4) fail(ErrorKind::ParseError, "corrupt checkpoint tensor rank");
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = u64();
    nn::Tensor t(shape);
    for (double& v : t.data) v = f64();
    return t;
  }
};

inline void write_tcn_config(BinaryWriter& w, const nn::TcnConfig& cfg) {
  w.u64(cfg.in_channels);
  w.u64(cfg.hidden_channels);
  w.u64(cfg.num_blocks);
  w.u64(cfg.kernel_size);
  w.u64(cfg.embedding_dim);
}

inline nn::TcnConfig read_tcn_config(BinaryReader& r) {
  nn::TcnConfig cfg;
  cfg.in_channels = r.u64();
  cfg.hidden_channels = r.u64();
  cfg.num_blocks = r.u64();
  cfg.kernel_size = r.u64();
  cfg.embedding_dim = r.u64();
  return cfg;
}

constexpr char kCheckpointMagic[8] = {'T', 'F', 'D', 'M', 'O', 'D', 'L', '1'};

}  // namespace detail

/// Everything detect needs to reproduce scoring: model weights and the
/// preprocessing settings they were trained under.
struct Checkpoint {
  nn::ModelParams params;
  double lambda = 10000.0;
  WindowSpec window;
  double threshold = 0.5;
};

/// Fixed-layout little-endian binary; doubles are stored bit-exactly, so a
/// load/save cycle reproduces the file byte for byte.
inline void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  detail::BinaryWriter w;
  w.buf.append(detail::kCheckpointMagic, 8);
  w.f64(ckpt.lambda);
  w.u64(ckpt.window.context_len);
  w.u64(ckpt.window.suspect_len);
  w.u64(ckpt.window.stride);
  w.f64(ckpt.threshold);
  const nn::ModelConfig& cfg = ckpt.params.config;
  w.u64(cfg.use_decomposition ? 1 : 0);
  for (bool b : cfg.branch_enabled) w.u64(b ? 1 : 0);
  for (const auto& t : cfg.tcn) detail::write_tcn_config(w, t);
  for (const auto& enc : ckpt.params.encoders) {
    w.u64(enc.conv1_w.size());
    for (std::size_t b = 0; b < enc.conv1_w.size(); ++b) {
      w.tensor(enc.conv1_w[b]);
      w.tensor(enc.conv2_w[b]);
      w.u64(enc.skip_w[b].numel() > 0 ? 1 : 0);
      if (enc.skip_w[b].numel() > 0) w.tensor(enc.skip_w[b]);
    }
    w.tensor(enc.out_w);
    w.tensor(enc.out_b);
  }
  w.tensor(ckpt.params.head_w);
  w.tensor(ckpt.params.head_b);
  atomic_write(path, w.buf);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::string buf = read_file(path);
  if (buf.size() < 8 || std::memcmp(buf.data(), detail::kCheckpointMagic, 8) != 0)
    fail(ErrorKind::ParseError, "'" + path + "' is not a model checkpoint");
  detail::BinaryReader r{buf, 8};
  Checkpoint ckpt;
  ckpt.lambda = r.f64();
  ckpt.window.context_len = r.u64();
  ckpt.window.suspect_len = r.u64();
  ckpt.window.stride = r.u64();
  ckpt.threshold = r.f64();
  nn::ModelConfig cfg;
  cfg.use_decomposition = r.u64() != 0;
  for (auto& b : cfg.branch_enabled) b = r.u64() != 0;
  for (auto& t : cfg.tcn) t = detail::read_tcn_config(r);
  ckpt.params.config = cfg;
  for (std::size_t i = 0; i < 4; ++i) {
    nn::TcnParams& enc = ckpt.params.encoders[i];
    enc.config = cfg.tcn[i];
    std::size_t blocks = r.u64();
    for (std::size_t b = 0; b < blocks; ++b) {
      enc.conv1_w.push_back(r.tensor());
      enc.conv2_w.push_back(r.tensor());
      if (r.u64() != 0) {
        enc.skip_w.push_back(r.tensor());
      } else {
        enc.skip_w.emplace_back();
      }
    }
    enc.out_w = r.tensor();
    enc.out_b = r.tensor();
  }
  ckpt.params.head_w = r.tensor();
  ckpt.params.head_b = r.tensor();
  if (r.pos != buf.size()) fail(ErrorKind::ParseError, "trailing bytes in checkpoint");
  return ckpt;
}

/// detect output: one `start,score` row per window.
inline std::string scores_to_csv(const std::vector<WindowScore>& scores) {
  std::string out = "start,score\n";
  char line[64];
  for (const WindowScore& w : scores) {
    std::snprintf(line, sizeof line, "%zu,%.17g\n", w.start, w.score);
    out += line;
  }
  return out;
}

/// detect output: one `timestamp,label` row per point (timestamps are the
/// implicit sample indices).
inline std::string labels_to_csv(const std::vector<std::uint8_t>& labels) {
  std::string out = "timestamp,label\n";
  char line[32];
  for (std::size_t t = 0; t < labels.size(); ++t) {
    std::snprintf(line, sizeof line, "%zu,%u\n", t, static_cast<unsigned>(labels[t]));
    out += line;
  }
  return out;
}

/// Reads a `timestamp,label` CSV back into a label sequence.
inline std::vector<std::uint8_t> read_labels_csv(const std::string& path) {
  std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail(ErrorKind::ParseError, "empty file '" + path + "'");
  ++line_no;
  std::vector<std::string> header = detail::split_line(detail::strip(line), ',');
  if (header.size() < 2 || detail::strip(header.back()) != "label")
    fail(ErrorKind::ParseError, "'" + path + "': expected a trailing 'label' column");
  std::vector<std::uint8_t> labels;
  while (std::getline(in, line)) {
    ++line_no;
    std::string stripped = detail::strip(line);
    if (stripped.empty()) continue;
    std::vector<std::string> cells = detail::split_line(stripped, ',');
    double lv = detail::parse_double(cells.back(), line_no);
    if (lv != 0.0 && lv != 1.0)
      fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": label must be 0 or 1");
    labels.push_back(lv == 1.0 ? 1 : 0);
  }
  return labels;
}

}  // namespace tfd::io
