#pragma once

// Seeded generators for desk-scale experiments and fixtures.

#include <cstdint>
#include <string>
#include <vector>

#include "socq/eval_harness.hpp"
#include "socq/question_filter.hpp"
#include "socq/seq2seq.hpp"
#include "socq/social_profiler.hpp"

namespace socq::synthetic {

struct Triple {
  std::string id;
  std::string post_id;
  std::string subreddit;
  std::string post;
  std::string question;
  GroupValue group = GroupValue::UNK;
};

// Every post receives one question per labelled value of `category`. The
// value alone selects the question template; the post's topic fills its slot.
std::vector<Triple> question_corpus(std::size_t posts, GroupCategory category, std::uint64_t seed);

// The template a value produces for a topic, for checking generations.
std::string question_template(GroupValue value, const std::string& topic);

std::vector<seq2seq::ConditionedExample> to_examples(const std::vector<Triple>& triples);
std::vector<eval::EvalItem> to_eval_items(const std::vector<Triple>& triples);

// Askers with 1..60 comments spread over the target, one related and some
// unrelated subreddits, with reply latencies drawn per asker.
std::vector<profile::AskerProfile> profile_population(std::size_t n, const std::string& target,
                                                      const std::string& related,
                                                      std::uint64_t seed);

// Info-seeking rows contain a marker vocabulary the other rows never use;
// all annotators agree on every row.
std::vector<questions::AnnotatedQuestion> separable_annotations(std::size_t n, std::uint64_t seed);

// Questions drawn from two disjoint topic vocabularies, plus word vectors
// for those words. Pairs mix within- and cross-cluster questions.
struct ClusterFixture {
  std::vector<std::pair<std::string, std::string>> pairs;
  eval::WordVectors vectors;
};
ClusterFixture clustered_questions(std::size_t pairs, std::size_t dim, std::uint64_t seed);

}  // namespace socq::synthetic
