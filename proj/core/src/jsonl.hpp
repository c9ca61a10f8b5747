// Internal helpers for the append-only JSON-lines stores.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace biasscope::detail {

// Drops an incomplete trailing line left by an interrupted append.
void repair_torn_tail(const std::filesystem::path& path);

struct JsonlLine {
  std::size_t number = 0;
  std::string text;
  bool torn = false;  // last line without a terminating newline
};

// Non-blank lines of the file; empty when it does not exist.
std::vector<JsonlLine> read_jsonl(const std::filesystem::path& path);

class AppendWriter {
 public:
  AppendWriter(const std::filesystem::path& path, bool fsync_each);
  ~AppendWriter();
  AppendWriter(const AppendWriter&) = delete;
  AppendWriter& operator=(const AppendWriter&) = delete;

  void append_line(const std::string& line);

 private:
  std::filesystem::path path_;
  bool fsync_;
  int fd_ = -1;
};

}  // namespace biasscope::detail
