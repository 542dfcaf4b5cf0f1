#include "manifest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "error.hpp"
#include "features.hpp"

namespace fgai {

void Manifest::validate() const {
  std::set<std::string> ids;
  std::map<std::string, std::vector<long long>> frames;
  for (const auto& r : rows) {
    if (r.scan_id.empty()) fail(ErrorCode::InvalidArgument, "manifest row with empty scan_id");
    if (!ids.insert(r.scan_id).second) fail(ErrorCode::InvalidArgument, "duplicate scan_id '" + r.scan_id + "'");
    if (r.sequence_id.empty() != !r.frame_index.has_value())
      fail(ErrorCode::InvalidArgument, "scan '" + r.scan_id + "': sequence_id and frame_index must be given together");
    if (r.frame_index) frames[r.sequence_id].push_back(*r.frame_index);
  }
  for (auto& [seq, idx] : frames) {
    std::sort(idx.begin(), idx.end());
    for (std::size_t i = 0; i < idx.size(); ++i)
      if (idx[i] != static_cast<long long>(i))
        fail(ErrorCode::InvalidArgument, "sequence '" + seq + "': frame indices are not dense from 0");
  }
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open manifest " + path.string());
  const auto base = path.parent_path();
  auto resolve = [&base](const std::string& p) {
    std::filesystem::path q(p);
    return q.is_absolute() ? q : base / q;
  };

  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Parse, path.string() + ": empty manifest");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  const std::vector<std::string> want{"scan_id", "mesh", "texture", "subject_id", "label", "sequence_id", "frame_index"};
  if (header.size() != 5 && header.size() != 7) fail(ErrorCode::Parse, path.string() + ":1: unexpected header");
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] != want[i]) fail(ErrorCode::Parse, path.string() + ":1: expected column '" + want[i] + "'");

  Manifest m;
  for (int lineno = 2; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (cells.size() != header.size()) fail(ErrorCode::Parse, where + ": expected " + std::to_string(header.size()) + " columns");
    ManifestRow r{cells[0], resolve(cells[1]), resolve(cells[2]), cells[3], cells[4], {}, {}};
    if (cells.size() == 7) {
      r.sequence_id = cells[5];
      if (!cells[6].empty()) {
        std::size_t used = 0;
        try {
          r.frame_index = std::stoll(cells[6], &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != cells[6].size()) fail(ErrorCode::Parse, where + ": bad frame_index '" + cells[6] + "'");
      }
    }
    m.rows.push_back(std::move(r));
  }
  m.validate();
  return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << "scan_id,mesh,texture,subject_id,label,sequence_id,frame_index\n";
  for (const auto& r : manifest.rows) {
    out << r.scan_id << ',' << r.mesh.string() << ',' << r.texture.string() << ',' << r.subject_id << ',' << r.label
        << ',' << r.sequence_id << ',';
    if (r.frame_index) out << *r.frame_index;
    out << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

}  // namespace fgai
