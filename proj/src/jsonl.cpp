#include "kidlmforge/jsonl.hpp"

#include <fstream>

#include "kidlmforge/types.hpp"

namespace kidlm::jsonl {

void for_each_record(std::istream& in,
                     const std::function<void(const json&, std::size_t)>& on_record,
                     const std::function<void(std::size_t, const std::string&)>&
                         on_bad_line) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded()) {
      if (on_bad_line) on_bad_line(line_no, "parse-error");
      continue;
    }
    if (!obj.is_object()) {
      if (on_bad_line) on_bad_line(line_no, "not-an-object");
      continue;
    }
    if (obj.contains("_header")) continue;
    on_record(obj, line_no);
  }
  if (in.bad()) throw Error("io", "stream read failure");
}

std::string make_header_line(const json& header_fields) {
  json line;
  line["_header"] = header_fields;
  return line.dump();
}

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error("io", "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace kidlm::jsonl
