#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kidlm {

// Error with a stable machine-readable code alongside the human message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct Document {
  std::string id;
  std::string source;
  std::optional<std::string> url;
  std::string text;
  std::vector<std::string> tags;
  std::optional<int> grade_level;  // K encoded as 0, grades 1-12
  std::optional<std::string> region;
};

struct Sentence {
  std::string doc_id;
  std::size_t index = 0;  // position within the document, contiguous from 0
  std::string text;
  std::size_t word_count = 0;
};

struct DocumentSet {
  std::vector<Document> docs;

  bool empty() const { return docs.empty(); }
  std::size_t size() const { return docs.size(); }
};

}  // namespace kidlm
