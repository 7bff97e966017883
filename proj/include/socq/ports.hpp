#pragma once

// Pluggable ports for the external NLP services the pipeline depends on
// (sentence encoder, language id, NER, geocoding, dependency parsing), plus
// the deterministic offline implementations used by tests and the CLI.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace socq {

class PortError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SentenceEncoder {
 public:
  virtual ~SentenceEncoder() = default;
  virtual std::vector<double> encode(std::string_view text) const = 0;
  virtual std::size_t dim() const = 0;
};

// Deterministic bag-of-hashed-features encoder: every lowercased word and
// adjacent word bigram maps to a fixed pseudo-random Gaussian direction; the
// sentence vector is their weighted sum, L2-normalised.
class HashingSentenceEncoder final : public SentenceEncoder {
 public:
  explicit HashingSentenceEncoder(std::size_t dim = 128, std::uint64_t seed = 7,
                                  double bigram_weight = 0.5);
  std::vector<double> encode(std::string_view text) const override;
  std::size_t dim() const override { return dim_; }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  double bigram_weight_;
};

// Pseudo-random unit-variance direction for a feature string.
std::vector<double> hashed_direction(std::string_view feature, std::size_t dim,
                                     std::uint64_t seed);

class LanguageDetector {
 public:
  virtual ~LanguageDetector() = default;
  virtual bool is_english(std::string_view text) const = 0;
};

// Flags text as English when at least `min_ratio` of its letters are ASCII.
class AsciiRatioDetector final : public LanguageDetector {
 public:
  explicit AsciiRatioDetector(double min_ratio = 0.9) : min_ratio_(min_ratio) {}
  bool is_english(std::string_view text) const override;

 private:
  double min_ratio_;
};

struct EntitySpan {
  std::string text;
  std::size_t begin = 0;  // byte offsets into the scanned text
  std::size_t end = 0;
};

class EntityRecognizer {
 public:
  virtual ~EntityRecognizer() = default;
  virtual std::vector<EntitySpan> locations(std::string_view text) const = 0;
};

class Gazetteer {
 public:
  virtual ~Gazetteer() = default;
  // Country for a place name, nullopt when unknown. May throw PortError.
  virtual std::optional<std::string> country(std::string_view place) const = 0;
};

// place -> country table, keys compared case-insensitively.
class MapGazetteer final : public Gazetteer {
 public:
  MapGazetteer() = default;
  explicit MapGazetteer(const std::map<std::string, std::string>& entries);
  std::optional<std::string> country(std::string_view place) const override;
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

// Offline NER stand-in: reports every 1-3 word span that names a known place.
class GazetteerEntityRecognizer final : public EntityRecognizer {
 public:
  explicit GazetteerEntityRecognizer(const MapGazetteer& gazetteer) : gazetteer_(gazetteer) {}
  std::vector<EntitySpan> locations(std::string_view text) const override;

 private:
  const MapGazetteer& gazetteer_;
};

bool is_us_country(std::string_view country);

struct DepToken {
  std::string word;
  int head = -1;  // -1 marks the root
  std::string rel;
};

class DependencyParser {
 public:
  virtual ~DependencyParser() = default;
  virtual std::vector<DepToken> parse(std::string_view sentence) const = 0;
};

// Rule-based parser covering the shapes that matter for question typing:
// the main verb is the root, fronted wh-words attach as advmod/dobj, fronted
// auxiliaries attach as aux, in-situ wh-words attach to the root.
class HeuristicDependencyParser final : public DependencyParser {
 public:
  std::vector<DepToken> parse(std::string_view sentence) const override;
};

// Plain-text key<TAB>value files; '#' starts a comment line.
std::map<std::string, std::string> load_key_values(const std::string& path);
std::vector<std::string> load_lines(const std::string& path);

}  // namespace socq
