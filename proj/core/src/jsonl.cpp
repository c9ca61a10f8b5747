#include "jsonl.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <fstream>
#include <iterator>

#include "biasscope/error.hpp"
#include "biasscope/text.hpp"

namespace biasscope::detail {

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

void repair_torn_tail(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path) || std::filesystem::file_size(path) == 0) return;
  const std::string content = slurp(path);
  if (content.back() == '\n') return;
  const auto last_nl = content.rfind('\n');
  const std::uintmax_t keep = last_nl == std::string::npos ? 0 : last_nl + 1;
  std::filesystem::resize_file(path, keep);
}

std::vector<JsonlLine> read_jsonl(const std::filesystem::path& path) {
  std::vector<JsonlLine> lines;
  if (!std::filesystem::exists(path)) return lines;
  const std::string content = slurp(path);
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    ++number;
    const auto nl = content.find('\n', pos);
    const bool torn = nl == std::string::npos;
    std::string line = content.substr(pos, torn ? std::string::npos : nl - pos);
    pos = torn ? content.size() : nl + 1;
    if (text::trim(line).empty()) continue;
    lines.push_back({number, std::move(line), torn});
  }
  return lines;
}

AppendWriter::AppendWriter(const std::filesystem::path& path, bool fsync_each) : path_(path), fsync_(fsync_each) {
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(Errc::Io, "cannot open " + path.string() + " for append");
}

AppendWriter::~AppendWriter() {
  if (fd_ >= 0) ::close(fd_);
}

void AppendWriter::append_line(const std::string& line) {
  std::string buf = line;
  buf.push_back('\n');
  std::size_t off = 0;
  while (off < buf.size()) {
    const auto n = ::write(fd_, buf.data() + off, buf.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::Io, "write failed for " + path_.string());
    }
    off += static_cast<std::size_t>(n);
  }
  if (fsync_ && ::fsync(fd_) != 0) throw Error(Errc::Io, "fsync failed for " + path_.string());
}

}  // namespace biasscope::detail
