#include "fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

namespace copypaste::testing {

std::uint64_t hash_tree(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const auto& f : files) {
    for (char c : std::filesystem::relative(f, dir).generic_string()) mix(static_cast<unsigned char>(c));
    std::ifstream in(f, std::ios::binary);
    for (auto it = std::istreambuf_iterator<char>(in); it != std::istreambuf_iterator<char>(); ++it) {
      mix(static_cast<unsigned char>(*it));
    }
  }
  return h;
}

}  // namespace copypaste::testing
