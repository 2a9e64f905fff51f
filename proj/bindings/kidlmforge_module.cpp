// Python bindings for the core operations.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kidlmforge/corpus.hpp"
#include "kidlmforge/filters.hpp"
#include "kidlmforge/lang_detect.hpp"
#include "kidlmforge/masking.hpp"
#include "kidlmforge/probes.hpp"
#include "kidlmforge/scoring.hpp"
#include "kidlmforge/strata.hpp"
#include "kidlmforge/text.hpp"

namespace py = pybind11;
using namespace kidlm;

namespace {

DocumentSet documents_from_texts(const std::vector<std::string>& texts) {
  DocumentSet docs;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    Document d;
    d.id = "py-" + std::to_string(i);
    d.source = "python";
    d.text = texts[i];
    docs.docs.push_back(std::move(d));
  }
  return docs;
}

py::dict example_to_dict(const MaskedExample& ex) {
  py::dict out;
  out["id"] = ex.id;
  out["tokens"] = ex.tokens;
  out["mask_positions"] = ex.mask_positions;
  py::dict labels;
  for (const auto& [pos, tok] : ex.labels) labels[py::int_(pos)] = tok;
  out["labels"] = labels;
  py::dict strata;
  for (const auto& [pos, st] : ex.strata)
    strata[py::int_(pos)] = stratum_name(st);
  out["strata"] = strata;
  return out;
}

std::vector<std::pair<std::string, double>> dist_entries(
    const ScoredDistribution& d) {
  return d.entries;
}

}  // namespace

PYBIND11_MODULE(_kidlmforge, m) {
  m.doc() = "Corpus curation, stratified masking, and LM probing core";

  py::register_exception<Error>(m, "KidlmError");

  // ----- text + strata
  m.def("normalize_word", &normalize_word, py::arg("raw"));
  m.def("word_segment",
        [](const std::string& text) { return word_segment(text); },
        py::arg("text"));

  py::class_<StrataLexicon>(m, "StrataLexicon")
      .def_property_readonly(
          "stopword_count",
          [](const StrataLexicon& lex) { return lex.stopwords.size(); })
      .def_property_readonly(
          "dalechall_count",
          [](const StrataLexicon& lex) { return lex.dalechall.size(); })
      .def_property_readonly("overlap_removed",
                             [](const StrataLexicon& lex) {
                               return lex.provenance.overlap_removed;
                             });
  m.def("load_lexicons", &load_lexicons, py::arg("stopword_file"),
        py::arg("dalechall_file"));
  m.def(
      "classify_word",
      [](const std::string& word, const StrataLexicon& lexicon) {
        return std::string(stratum_name(classify_word(word, lexicon)));
      },
      py::arg("word"), py::arg("lexicon"));
  m.def(
      "strata_proportions",
      [](const std::vector<std::string>& texts, const StrataLexicon& lexicon) {
        StrataProportions p =
            strata_proportions(documents_from_texts(texts), lexicon);
        return py::make_tuple(p.stopword, p.dalechall, p.other);
      },
      py::arg("texts"), py::arg("lexicon"));

  // ----- corpus
  m.def(
      "segment_sentences",
      [](const std::string& text) {
        Document doc;
        doc.id = "py";
        doc.source = "python";
        doc.text = text;
        std::vector<std::pair<std::string, std::size_t>> out;
        for (const Sentence& s : segment_sentences(doc))
          out.emplace_back(s.text, s.word_count);
        return out;
      },
      py::arg("text"));

  // ----- filters
  m.def(
      "scrub_pii",
      [](const std::string& text) {
        ScrubResult r = scrub_pii(text);
        return py::make_tuple(r.text, r.counts);
      },
      py::arg("text"));
  m.def(
      "detect_language",
      [](const std::string& text) {
        static const TrigramLanguageDetector detector;
        LanguageVerdict v = detector.detect(text);
        return py::make_tuple(v.language, v.confidence);
      },
      py::arg("text"));

  // ----- masking
  py::class_<MaskingPolicy>(m, "MaskingPolicy")
      .def_readwrite("p_stopword", &MaskingPolicy::p_stopword)
      .def_readwrite("p_dalechall", &MaskingPolicy::p_dalechall)
      .def_readwrite("p_other", &MaskingPolicy::p_other)
      .def_readwrite("seed", &MaskingPolicy::seed)
      .def_readwrite("mask_token", &MaskingPolicy::mask_token);
  m.def("kidlm_policy", &MaskingPolicy::kidlm, py::arg("seed") = 0);
  m.def("kidlm_plus_policy", &MaskingPolicy::kidlm_plus, py::arg("seed") = 0);
  m.def("parse_policy", &MaskingPolicy::parse, py::arg("spec"),
        py::arg("seed") = 0);
  m.def(
      "mask_words",
      [](const std::vector<std::string>& words, const StrataLexicon& lexicon,
         const MaskingPolicy& policy, std::uint64_t example_index) {
        TokenizedSequence seq;
        seq.id = "py-" + std::to_string(example_index);
        seq.tokens = words;
        for (std::size_t i = 0; i < words.size(); ++i)
          seq.word_spans.push_back({i, i + 1, words[i]});
        return example_to_dict(mask_sequence(seq, lexicon, policy, example_index));
      },
      py::arg("words"), py::arg("lexicon"), py::arg("policy"),
      py::arg("example_index") = 0);
  m.def(
      "expected_mask_fraction",
      [](double stopword, double dalechall, double other,
         const MaskingPolicy& policy) {
        return expected_mask_fraction({stopword, dalechall, other}, policy);
      },
      py::arg("stopword"), py::arg("dalechall"), py::arg("other"),
      py::arg("policy"));

  // ----- scoring
  py::class_<ReferenceScorer, std::shared_ptr<ReferenceScorer>>(
      m, "ReferenceScorer")
      .def_property_readonly(
          "vocab_size",
          [](const ReferenceScorer& s) { return s.caps().vocab_size; })
      .def_property_readonly(
          "mask_token",
          [](const ReferenceScorer& s) { return s.caps().mask_token; })
      .def(
          "score_masked",
          [](const ReferenceScorer& s, const std::vector<std::string>& tokens,
             const std::vector<std::size_t>& positions) {
            std::vector<std::vector<std::pair<std::string, double>>> out;
            for (const auto& d : score_masked(s, tokens, positions))
              out.push_back(dist_entries(d));
            return out;
          },
          py::arg("tokens"), py::arg("mask_positions"))
      .def(
          "score_prefix",
          [](const ReferenceScorer& s, const std::vector<std::string>& prefix) {
            return dist_entries(s.score_prefix(prefix));
          },
          py::arg("prefix_tokens"));
  m.def(
      "fit_reference_scorer",
      [](const std::vector<std::string>& texts, double smoothing) {
        return fit_reference_scorer(documents_from_texts(texts), smoothing);
      },
      py::arg("texts"), py::arg("smoothing") = 1.0);
  m.def(
      "mlm_loss",
      [](const py::dict& example,
         const std::vector<std::vector<std::pair<std::string, double>>>& dists) {
        MaskedExample ex;
        ex.id = example.contains("id") ? example["id"].cast<std::string>() : "py";
        ex.tokens = example["tokens"].cast<std::vector<std::string>>();
        ex.mask_positions =
            example["mask_positions"].cast<std::vector<std::size_t>>();
        for (const auto& item : example["labels"].cast<py::dict>()) {
          std::size_t pos = item.first.cast<std::size_t>();
          ex.labels[pos] = item.second.cast<std::string>();
          ex.strata[pos] = Stratum::Other;
        }
        std::vector<ScoredDistribution> sds;
        for (std::size_t i = 0; i < dists.size(); ++i) {
          ScoredDistribution d;
          d.position = i < ex.mask_positions.size() ? ex.mask_positions[i] : i;
          d.entries = dists[i];
          d.sort_entries();
          sds.push_back(std::move(d));
        }
        return mlm_loss(ex, sds);
      },
      py::arg("example"), py::arg("distributions"));

  // ----- probes
  m.def(
      "pseudo_perplexity",
      [](const std::vector<std::string>& tokens, const ReferenceScorer& scorer) {
        PplResult r = pseudo_perplexity(tokens, scorer);
        return py::make_tuple(r.ppl, r.oov_count);
      },
      py::arg("sentence_tokens"), py::arg("scorer"));
  m.def(
      "build_stereotype_prompts",
      [](const std::string& groups_path, const std::string& form) {
        SocialGroupRegistry reg = SocialGroupRegistry::load(groups_path);
        auto queries = build_stereotype_prompts(
            reg, form == "prefix" ? ProbeQuery::Form::Prefix
                                  : ProbeQuery::Form::Masked);
        std::vector<py::dict> out;
        for (const auto& q : queries) {
          py::dict d;
          d["id"] = q.template_id;
          d["category"] = q.group_category;
          d["group"] = q.group.value_or("");
          d["text"] = q.text;
          out.push_back(std::move(d));
        }
        return out;
      },
      py::arg("groups_path"), py::arg("form") = "masked");
  m.def(
      "cloze_topk",
      [](const std::string& template_text, const ReferenceScorer& scorer,
         std::size_t k) {
        ProbeQuery q = ProbeQuery::from_template("py", "Preferences",
                                                 template_text, std::nullopt);
        TopKResult r = cloze_topk(q, scorer, k);
        return r.items;
      },
      py::arg("template_text"), py::arg("scorer"), py::arg("k") = 5);
  m.def(
      "lexical_simplification",
      [](const std::vector<std::string>& tokens, std::size_t begin,
         std::size_t end, const ReferenceScorer& scorer, std::size_t k) {
        return lexical_simplification_probe(tokens, begin, end, scorer, k).items;
      },
      py::arg("sentence_tokens"), py::arg("span_begin"), py::arg("span_end"),
      py::arg("scorer"), py::arg("k") = 3);
}
