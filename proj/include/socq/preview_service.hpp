#pragma once

// HTTP front end over one loaded question-generation model.
//
//   POST /generate  {"post_text", "subreddit", "category", "group_value",
//                    "variant", "compare": bool, "attention": bool}
//     -> {"questions": [{"text", "group_value"}], "model_version", "variant",
//         "attention": {"tokens", "score_g1", "score_g2", "ratio", "groups"} | null}
//   GET /groups     -> {"EXPERTISE": ["Expert", "Novice", "UNK"], ...}
//   GET /health     -> {"status": "ready" | "not-ready", "model_version"}

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "socq/seq2seq.hpp"
#include "socq/types.hpp"

namespace httplib {
class Server;
}

namespace socq::service {

class QuestionModel {
 public:
  virtual ~QuestionModel() = default;
  virtual std::string generate(const std::string& post, GroupValue group) const = 0;
  virtual std::vector<seq2seq::AttentionScore> attention(const std::string& post) const = 0;
  virtual bool supports_attention() const = 0;
  virtual GroupCategory category() const = 0;
  virtual std::string variant() const = 0;
  virtual std::string version() const = 0;
};

class Seq2SeqQuestionModel final : public QuestionModel {
 public:
  explicit Seq2SeqQuestionModel(std::shared_ptr<const seq2seq::Model> model);
  std::string generate(const std::string& post, GroupValue group) const override;
  std::vector<seq2seq::AttentionScore> attention(const std::string& post) const override;
  bool supports_attention() const override;
  GroupCategory category() const override { return model_->config().category; }
  std::string variant() const override { return std::string(seq2seq::to_string(model_->config().variant)); }
  std::string version() const override { return version_; }

 private:
  std::shared_ptr<const seq2seq::Model> model_;
  std::string version_;
};

struct Response {
  int status = 200;
  std::string body;
};

class PreviewService {
 public:
  void load(std::shared_ptr<const QuestionModel> model);
  bool ready() const;

  Response generate(const std::string& request_body) const;
  Response groups() const;
  Response health() const;

  void install(httplib::Server& server) const;

 private:
  std::shared_ptr<const QuestionModel> model() const;

  mutable std::mutex mu_;
  std::shared_ptr<const QuestionModel> model_;
};

// Blocks serving on host:port. When `checkpoint` is non-empty the model is
// loaded in the background so /health reports not-ready until it is up.
int serve(const std::string& checkpoint, const std::string& host, int port);

}  // namespace socq::service
