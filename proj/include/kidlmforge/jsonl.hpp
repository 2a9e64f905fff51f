#pragma once

#include <filesystem>
#include <functional>
#include <istream>
#include <string>

#include <json.hpp>

namespace kidlm::jsonl {

using json = nlohmann::json;

// Reads one JSON object per line. Blank lines are skipped, as are metadata
// lines (objects carrying a "_header" key). `on_record` receives the parsed
// object and its 1-based line number; `on_bad_line` (optional) receives the
// line number and a reason for lines that fail to parse or are not objects.
void for_each_record(std::istream& in,
                     const std::function<void(const json&, std::size_t)>& on_record,
                     const std::function<void(std::size_t, const std::string&)>&
                         on_bad_line = nullptr);

// Header line other artifacts are stamped with: {"_header": {...}}.
std::string make_header_line(const json& header_fields);

// Writes `contents` to a temp file next to `path`, then renames into place.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

}  // namespace kidlm::jsonl
