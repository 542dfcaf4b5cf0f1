// Writes a synthetic bump/dent dataset and its manifest for the CLI smoke test.
// With "sequences", each subject's scans of one label form a frame sequence.

#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "core/manifest.hpp"
#include "fixtures.hpp"

int main(int argc, char** argv) {
  if (argc != 5 && !(argc == 6 && std::strcmp(argv[5], "sequences") == 0)) {
    std::fprintf(stderr, "usage: make_dataset DIR SUBJECTS SCANS_PER_SUBJECT SEED [sequences]\n");
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  auto m = fixtures::write_bump_dent_dataset(dir, std::atoi(argv[2]), std::atoi(argv[3]),
                                             std::strtoull(argv[4], nullptr, 10));
  if (argc == 6) {
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
      auto& r = m.rows[i];
      const long long k = static_cast<long long>(i % static_cast<std::size_t>(std::atoi(argv[3])));
      r.sequence_id = r.subject_id + "_" + r.label;
      r.frame_index = k / 2;
    }
    fgai::write_manifest(dir / "manifest.csv", m);
  }
  std::printf("%zu scans\n", m.rows.size());
  return 0;
}
