#include "features.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "error.hpp"

namespace fgai {

void FeatureMatrix::validate() const {
  const auto n = static_cast<std::size_t>(values.rows());
  if (sample_ids.size() != n || subject_ids.size() != n || labels.size() != n)
    fail(ErrorCode::InvalidArgument, "feature matrix: row, id and label counts differ");
  if (!sequence_ids.empty() && (sequence_ids.size() != n || frame_indices.size() != n))
    fail(ErrorCode::InvalidArgument, "feature matrix: sequence metadata count differs from rows");
  if (!values.allFinite()) fail(ErrorCode::InvalidArgument, "feature matrix contains non-finite values");
}

std::vector<std::string> FeatureMatrix::classes() const {
  std::set<std::string> s(labels.begin(), labels.end());
  return {s.begin(), s.end()};
}

std::vector<int> FeatureMatrix::class_indices(const std::vector<std::string>& cls) const {
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    const auto it = std::lower_bound(cls.begin(), cls.end(), l);
    if (it == cls.end() || *it != l) fail(ErrorCode::InvalidArgument, "unknown class label '" + l + "'");
    out.push_back(static_cast<int>(it - cls.begin()));
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<Eigen::Index>& rows) const {
  FeatureMatrix out;
  out.layer = layer;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Eigen::Index r = rows[i];
    out.values.row(static_cast<Eigen::Index>(i)) = values.row(r);
    const auto ur = static_cast<std::size_t>(r);
    out.sample_ids.push_back(sample_ids[ur]);
    out.subject_ids.push_back(subject_ids[ur]);
    out.labels.push_back(labels[ur]);
    if (has_sequences()) {
      out.sequence_ids.push_back(sequence_ids[ur]);
      out.frame_indices.push_back(frame_indices[ur]);
    }
  }
  return out;
}

std::filesystem::path labels_path_for(const std::filesystem::path& matrix_path) {
  std::filesystem::path p = matrix_path;
  p.replace_extension();
  p += ".labels.csv";
  return p;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                              static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b.data(), 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

}  // namespace

void write_fmx_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out.write("FMX1", 4);
  put_u32(out, static_cast<std::uint32_t>(values.rows()));
  put_u32(out, static_cast<std::uint32_t>(values.cols()));
  for (Eigen::Index r = 0; r < values.rows(); ++r)
    for (Eigen::Index c = 0; c < values.cols(); ++c) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(values(r, c))));
  if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

Eigen::MatrixXd read_fmx_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::array<unsigned char, 12> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  if (in.gcount() != 12 || std::memcmp(header.data(), "FMX1", 4) != 0)
    fail(ErrorCode::Parse, path.string() + ": not an FMX1 file");
  const std::uint32_t rows = get_u32(header.data() + 4), cols = get_u32(header.data() + 8);
  const std::size_t count = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> payload(count * 4);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(in.gcount()) != payload.size())
    fail(ErrorCode::Parse, path.string() + ": payload shorter than header announces");
  if (in.peek() != std::char_traits<char>::eof()) fail(ErrorCode::Parse, path.string() + ": trailing bytes after payload");
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < count; ++i)
    m(static_cast<Eigen::Index>(i / cols), static_cast<Eigen::Index>(i % cols)) =
        std::bit_cast<float>(get_u32(payload.data() + 4 * i));
  return m;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch == '"') {
      fail(ErrorCode::Parse, "quoted CSV fields are not supported");
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

void write_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& fm) {
  fm.validate();
  write_fmx_matrix(path, fm.values);
  const auto lp = labels_path_for(path);
  std::ofstream out(lp);
  if (!out) fail(ErrorCode::Io, "cannot write " + lp.string());
  out << "sample_id,subject_id,label";
  if (fm.has_sequences()) out << ",sequence_id,frame_index";
  out << '\n';
  for (std::size_t i = 0; i < fm.sample_ids.size(); ++i) {
    out << fm.sample_ids[i] << ',' << fm.subject_ids[i] << ',' << fm.labels[i];
    if (fm.has_sequences()) out << ',' << fm.sequence_ids[i] << ',' << fm.frame_indices[i];
    out << '\n';
  }
  if (!out) fail(ErrorCode::Io, "failed writing " + lp.string());
}

FeatureMatrix read_feature_matrix(const std::filesystem::path& path) {
  FeatureMatrix fm;
  fm.values = read_fmx_matrix(path);
  const auto lp = labels_path_for(path);
  std::ifstream in(lp);
  if (!in) fail(ErrorCode::Io, "cannot open labels file " + lp.string());
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Parse, lp.string() + ": empty labels file");
  const auto header = split_csv_line(line);
  const bool seq = header.size() == 5;
  if (!(header.size() == 3 || seq) || header[0] != "sample_id" || header[1] != "subject_id" || header[2] != "label" ||
      (seq && (header[3] != "sequence_id" || header[4] != "frame_index")))
    fail(ErrorCode::Parse, lp.string() + ": unexpected header");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      fail(ErrorCode::Parse, lp.string() + ":" + std::to_string(line_no) + ": expected " +
                                 std::to_string(header.size()) + " fields");
    fm.sample_ids.push_back(f[0]);
    fm.subject_ids.push_back(f[1]);
    fm.labels.push_back(f[2]);
    if (seq) {
      fm.sequence_ids.push_back(f[3]);
      try {
        fm.frame_indices.push_back(std::stoll(f[4]));
      } catch (const std::exception&) {
        fail(ErrorCode::Parse, lp.string() + ":" + std::to_string(line_no) + ": bad frame index");
      }
    }
  }
  if (fm.sample_ids.size() != static_cast<std::size_t>(fm.values.rows()))
    fail(ErrorCode::Parse, lp.string() + ": " + std::to_string(fm.sample_ids.size()) + " label rows for " +
                               std::to_string(fm.values.rows()) + " matrix rows");
  fm.layer = path.stem().string();
  fm.validate();
  return fm;
}

FeatureMatrix concat_rows(const std::vector<FeatureMatrix>& parts) {
  if (parts.empty()) fail(ErrorCode::InvalidArgument, "nothing to concatenate");
  Eigen::Index rows = 0;
  const bool seq = parts.front().has_sequences();
  for (const auto& p : parts) {
    if (p.cols() != parts.front().cols()) fail(ErrorCode::InvalidArgument, "feature matrices differ in column count");
    if (p.has_sequences() != seq) fail(ErrorCode::InvalidArgument, "feature matrices differ in sequence metadata");
    rows += p.rows();
  }
  FeatureMatrix out;
  out.layer = parts.front().layer;
  out.values.resize(rows, parts.front().cols());
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.values.middleRows(at, p.rows()) = p.values;
    at += p.rows();
    out.sample_ids.insert(out.sample_ids.end(), p.sample_ids.begin(), p.sample_ids.end());
    out.subject_ids.insert(out.subject_ids.end(), p.subject_ids.begin(), p.subject_ids.end());
    out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
    out.sequence_ids.insert(out.sequence_ids.end(), p.sequence_ids.begin(), p.sequence_ids.end());
    out.frame_indices.insert(out.frame_indices.end(), p.frame_indices.begin(), p.frame_indices.end());
  }
  return out;
}

}  // namespace fgai
