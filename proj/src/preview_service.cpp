#include "socq/preview_service.hpp"

#include <iostream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace socq::service {

using json = nlohmann::json;

Seq2SeqQuestionModel::Seq2SeqQuestionModel(std::shared_ptr<const seq2seq::Model> model)
    : model_(std::move(model)), version_(model_->version()) {}

std::string Seq2SeqQuestionModel::generate(const std::string& post, GroupValue group) const {
  seq2seq::ConditionedExample ex;
  ex.source = post;
  ex.group = group;
  return model_->generate(ex);
}

std::vector<seq2seq::AttentionScore> Seq2SeqQuestionModel::attention(const std::string& post) const {
  return model_->attention_ratio(post);
}

bool Seq2SeqQuestionModel::supports_attention() const {
  return model_->config().variant == seq2seq::Variant::SocialToken;
}

void PreviewService::load(std::shared_ptr<const QuestionModel> model) {
  std::lock_guard lock(mu_);
  model_ = std::move(model);
}

std::shared_ptr<const QuestionModel> PreviewService::model() const {
  std::lock_guard lock(mu_);
  return model_;
}

bool PreviewService::ready() const { return model() != nullptr; }

namespace {
Response error(int status, const std::string& message) {
  return {status, json{{"error", message}}.dump()};
}
}  // namespace

Response PreviewService::generate(const std::string& request_body) const {
  json req;
  try {
    req = json::parse(request_body);
  } catch (const json::exception& e) {
    return error(400, std::string("malformed JSON: ") + e.what());
  }
  if (!req.is_object()) return error(400, "request must be a JSON object");

  GroupCategory category;
  GroupValue value = GroupValue::UNK;
  std::string post;
  bool compare = false, want_attention = false;
  try {
    post = req.value("post_text", "");
    if (post.empty()) return error(400, "post_text must be non-empty");
    if (!req.contains("category")) return error(400, "category is required");
    category = parse_category(req["category"].get<std::string>());
    if (req.contains("group_value") && !req["group_value"].is_null())
      value = parse_value(req["group_value"].get<std::string>());
    if (!is_legal(category, value))
      return error(400, std::string(to_string(value)) + " is not a value of " + std::string(to_string(category)));
    compare = req.value("compare", false);
    want_attention = req.value("attention", false);
  } catch (const InvalidGroup& e) {
    return error(400, e.what());
  } catch (const json::exception& e) {
    return error(400, std::string("bad field type: ") + e.what());
  }

  auto m = model();
  if (!m) return error(503, "model not loaded");
  if (req.contains("variant") && !req["variant"].is_null() && req["variant"].get<std::string>() != m->variant())
    return error(400, "this service runs the " + m->variant() + " model");
  if (category != m->category())
    return error(400, "this model is conditioned on " + std::string(to_string(m->category())));

  const auto& values = values_of(category);
  std::vector<GroupValue> requested = compare ? std::vector<GroupValue>{values[0], values[1]}
                                              : std::vector<GroupValue>{value};
  json out;
  out["questions"] = json::array();
  try {
    for (auto g : requested)
      out["questions"].push_back({{"text", m->generate(post, g)}, {"group_value", std::string(to_string(g))}});
    if (want_attention && m->supports_attention()) {
      json a{{"tokens", json::array()}, {"score_g1", json::array()}, {"score_g2", json::array()},
             {"ratio", json::array()},
             {"groups", {std::string(to_string(values[0])), std::string(to_string(values[1]))}}};
      for (const auto& s : m->attention(post)) {
        a["tokens"].push_back(s.token);
        a["score_g1"].push_back(s.score_a);
        a["score_g2"].push_back(s.score_b);
        a["ratio"].push_back(s.ratio);
      }
      out["attention"] = std::move(a);
    } else {
      out["attention"] = nullptr;
    }
  } catch (const std::exception& e) {
    return error(500, std::string("generation failed: ") + e.what());
  }
  out["model_version"] = m->version();
  out["variant"] = m->variant();
  return {200, out.dump()};
}

Response PreviewService::groups() const {
  json out = json::object();
  for (auto c : all_categories()) {
    json vals = json::array();
    for (auto v : values_of(c)) vals.push_back(std::string(to_string(v)));
    out[std::string(to_string(c))] = vals;
  }
  return {200, out.dump()};
}

Response PreviewService::health() const {
  auto m = model();
  if (!m) return {503, json{{"status", "not-ready"}, {"model_version", nullptr}}.dump()};
  return {200, json{{"status", "ready"}, {"model_version", m->version()}, {"variant", m->variant()}}.dump()};
}

void PreviewService::install(httplib::Server& server) const {
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body, "application/json");
  };
  server.Post("/generate", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, generate(req.body));
  });
  server.Get("/groups", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, groups()); });
  server.Get("/health", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, health()); });
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

int serve(const std::string& checkpoint, const std::string& host, int port) {
  PreviewService svc;
  httplib::Server server;
  svc.install(server);
  std::thread loader;
  if (!checkpoint.empty()) {
    loader = std::thread([&svc, checkpoint] {
      try {
        auto m = std::make_shared<const seq2seq::Model>(seq2seq::Model::load(checkpoint));
        svc.load(std::make_shared<Seq2SeqQuestionModel>(m));
        std::cerr << "loaded " << checkpoint << "\n";
      } catch (const std::exception& e) {
        std::cerr << "failed to load " << checkpoint << ": " << e.what() << "\n";
      }
    });
  }
  std::cerr << "listening on " << host << ":" << port << "\n";
  const bool ok = server.listen(host, port);
  if (loader.joinable()) loader.join();
  return ok ? 0 : 1;
}

}  // namespace socq::service
