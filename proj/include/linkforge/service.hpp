#pragma once
// HTTP service over one tuning session directory: pair review, label
// capture, config metrics and selection, plus the static review UI.

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <httplib.h>

#include "linkforge/config.hpp"
#include "linkforge/error.hpp"
#include "linkforge/format.hpp"
#include "linkforge/tuning.hpp"

namespace linkforge {

inline int http_status(ErrorKind k) {
  switch (k) {
    case ErrorKind::not_found: return 404;
    case ErrorKind::conflict:
    case ErrorKind::insufficient_data: return 409;
    case ErrorKind::io: return 500;
    default: return 400;
  }
}

inline json error_json(ErrorKind kind, const std::string& message) {
  return json{{"error", json{{"kind", to_string(kind)}, {"message", message}}}};
}

namespace detail {

inline json opt_num(const std::optional<double>& v) { return v ? json(*v) : json(); }

inline json resident_json(const ResidentRecord& r) {
  json cov = json::object();
  for (auto c : kCovariateNames) {
    const auto* v = covariate(r.covariates, c);
    cov[std::string(c)] = *v ? json(**v) : json();
  }
  return json{{"resident_id", r.resident_id},
              {"name", r.raw_name},
              {"age", r.age ? json(*r.age) : json()},
              {"sex", r.sex ? json(std::string(to_string(*r.sex))) : json()},
              {"village", r.village},
              {"household_id", r.household_id},
              {"covariates", cov}};
}

inline json contact_json(const ContactRecord& c) {
  return json{{"contact_id", c.contact_id},
              {"namer_id", c.namer_id},
              {"domain", to_string(c.domain)},
              {"name", c.raw_name},
              {"age", c.reported_age ? json(*c.reported_age) : json()},
              {"village", c.reported_village ? json(*c.reported_village) : json()},
              {"sex", c.imputed_sex ? json(std::string(to_string(*c.imputed_sex))) : json()}};
}

inline json label_event_json(const LabelEvent& e) {
  return json{{"pair_id", e.pair_id}, {"label", to_string(e.label)}, {"annotator", e.annotator}, {"timestamp", e.timestamp}};
}

}  // namespace detail

class ReviewService {
 public:
  explicit ReviewService(fs::path session_dir, std::optional<fs::path> static_dir = std::nullopt)
      : dir_(std::move(session_dir)), session_(load_session(dir_)) {
    order_ = disagreement_order(session_);
    history_.resize(session_.pairs.size());
    for (std::size_t i = 0; i < session_.label_log.size(); ++i) history_[session_.label_log[i].pair_id].push_back(i);
    if (fs::exists(dir_ / "chosen_config.json")) {
      const auto chosen = read_json_file(dir_ / "chosen_config.json");
      if (auto it = chosen.find("source"); it != chosen.end() && it->contains("config_id"))
        selected_ = it->at("config_id").get<std::uint32_t>();
    }
    if (static_dir && !server_.set_mount_point("/", static_dir->string()))
      fail(ErrorKind::config, "static directory not found: " + static_dir->string());
    if (!static_dir) {
      server_.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("<!doctype html><title>linkforge</title><p>The review UI is not installed. The JSON API is under /api/.</p>",
                        "text/html");
      });
    }
    routes();
  }

  ReviewService(const ReviewService&) = delete;
  ReviewService& operator=(const ReviewService&) = delete;

  // Binds without serving; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port) {
    const int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) fail(ErrorKind::io, "cannot bind " + host + ":" + std::to_string(port));
    return bound;
  }

  // Serves until stop(); blocking.
  void serve() { server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

  // Blocks until a config has been selected through the API.
  std::uint32_t wait_for_selection() {
    std::unique_lock lk(select_mu_);
    select_cv_.wait(lk, [&] { return selected_.has_value(); });
    return *selected_;
  }

  std::optional<std::uint32_t> selected() const {
    std::lock_guard lk(select_mu_);
    return selected_;
  }

  httplib::Server& server() { return server_; }

 private:
  template <typename F>
  static void guarded(httplib::Response& res, F&& f) {
    try {
      res.status = 200;
      res.set_content(f().dump(), "application/json");
    } catch (const Error& e) {
      res.status = http_status(e.kind());
      res.set_content(error_json(e.kind(), e.what()).dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(error_json(ErrorKind::contract, e.what()).dump(), "application/json");
    }
  }

  static json parse_body(const httplib::Request& req) {
    try {
      auto j = json::parse(req.body);
      if (!j.is_object()) fail(ErrorKind::validation, "request body must be a JSON object");
      return j;
    } catch (const json::exception& e) {
      fail(ErrorKind::validation, std::string("malformed JSON body: ") + e.what());
    }
  }

  static std::uint32_t parse_id(const std::string& raw, const char* what) {
    std::uint32_t v = 0;
    const auto* end = raw.data() + raw.size();
    const auto [p, ec] = std::from_chars(raw.data(), end, v);
    if (ec != std::errc() || p != end) fail(ErrorKind::not_found, std::string("unknown ") + what + " '" + raw + "'");
    return v;
  }

  json pair_json(std::uint32_t pid, const std::map<std::uint32_t, Label>& labels) const {
    const auto& p = session_.pairs[pid];
    json sims = json::object();
    for (Field f : kAllFields) sims[std::string(to_string(f))] = detail::opt_num(p.sims.get(f));
    json hist = json::array();
    for (auto i : history_[pid]) hist.push_back(detail::label_event_json(session_.label_log[i]));
    const auto it = labels.find(pid);
    const double n = static_cast<double>(session_.configs.size());
    return json{{"pair_id", pid},
                {"votes", p.votes},
                {"vote_share", n > 0 ? p.votes / n : 0.0},
                {"label", it == labels.end() ? json() : json(to_string(it->second))},
                {"history", hist},
                {"similarities", sims},
                {"resident", detail::resident_json(session_.sample.residents[p.resident])},
                {"contact", detail::contact_json(session_.sample.contacts[p.contact])}};
  }

  json session_summary() const {
    const auto labels = session_.current_labels();
    std::size_t decided = 0;
    for (const auto& [_, l] : labels) decided += l != Label::unsure;
    json j = session_json(session_);
    j.erase("sampled_contact_ids");
    j["progress"] = json{{"labeled", labels.size()}, {"decided", decided}, {"total", session_.pairs.size()},
                         {"events", session_.label_log.size()}};
    std::lock_guard lk(select_mu_);
    j["selected_config_id"] = selected_ ? json(*selected_) : json();
    return j;
  }

  json configs_json() const {
    const auto labels = session_.current_labels();
    std::vector<ConfigMetrics> metrics;
    json recommended;
    if (!labels.empty()) {
      metrics = config_metrics(session_);
      try {
        const auto sel = select_config(metrics);
        recommended = json{{"config_id", sel.config_id}, {"constraint_met", sel.constraint_met},
                           {"warning", sel.warning ? json(*sel.warning) : json()}};
      } catch (const Error&) {
        // no config has both rates defined yet
      }
    }
    json list = json::array();
    for (std::size_t k = 0; k < session_.configs.size(); ++k) {
      const auto& c = session_.configs[k];
      json w = json::object();
      for (Field f : kAllFields) w[std::string(to_string(f))] = c.config.weights[static_cast<std::size_t>(f)];
      json row{{"config_id", c.config_id}, {"weights", w},   {"q", c.config.exceedance_quantile},
               {"u", c.u},                 {"t", c.t},       {"fallback", c.fallback},
               {"n_classified", c.n_classified}};
      if (!metrics.empty()) {
        const auto& m = metrics[k];
        row.update(json{{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}, {"tpr", detail::opt_num(m.tpr)},
                        {"fpr", detail::opt_num(m.fpr)}, {"coverage", detail::opt_num(m.coverage)}});
      } else {
        row.update(json{{"tp", 0}, {"fp", 0}, {"fn", 0}, {"tn", 0}, {"tpr", nullptr}, {"fpr", nullptr}, {"coverage", nullptr}});
      }
      list.push_back(std::move(row));
    }
    return json{{"n_labels", labels.size()}, {"min_tpr", kMinTpr}, {"recommended", recommended}, {"configs", list}};
  }

  void routes() {
    server_.Get("/api/session", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        std::shared_lock lk(mu_);
        return session_summary();
      });
    });

    server_.Get("/api/pairs", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string filter = req.has_param("filter") ? req.get_param_value("filter") : "all";
        const std::string order = req.has_param("order") ? req.get_param_value("order") : "disagreement";
        if (filter != "all" && filter != "labeled" && filter != "unlabeled")
          fail(ErrorKind::validation, "filter must be all, labeled or unlabeled");
        if (order != "disagreement" && order != "id") fail(ErrorKind::validation, "order must be disagreement or id");
        auto count = [&](const char* key, std::size_t dflt) {
          if (!req.has_param(key)) return dflt;
          const auto v = parse_double(req.get_param_value(key));
          if (!v || *v < 0) fail(ErrorKind::validation, std::string(key) + " must be a non-negative integer");
          return static_cast<std::size_t>(*v);
        };
        const std::size_t offset = count("offset", 0);
        const std::size_t limit = count("limit", SIZE_MAX);
        std::shared_lock lk(mu_);
        const auto labels = session_.current_labels();
        std::vector<std::uint32_t> ids;
        for (std::uint32_t i = 0; i < session_.pairs.size(); ++i) {
          const auto pid = order == "id" ? i : order_[i];
          const bool labeled = labels.count(pid) > 0;
          if (filter == "all" || (filter == "labeled") == labeled) ids.push_back(pid);
        }
        json out = json::array();
        for (std::size_t i = offset; i < ids.size() && out.size() < limit; ++i) out.push_back(pair_json(ids[i], labels));
        return json{{"total", ids.size()}, {"offset", offset}, {"pairs", out}};
      });
    });

    server_.Get(R"(/api/pairs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto pid = parse_id(req.matches[1], "pair");
        std::shared_lock lk(mu_);
        if (pid >= session_.pairs.size()) fail(ErrorKind::not_found, "unknown pair id " + std::to_string(pid));
        return pair_json(pid, session_.current_labels());
      });
    });

    server_.Post(R"(/api/pairs/([^/]+)/label)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto pid = parse_id(req.matches[1], "pair");
        {
          std::shared_lock lk(mu_);
          if (pid >= session_.pairs.size()) fail(ErrorKind::not_found, "unknown pair id " + std::to_string(pid));
        }
        const auto body = parse_body(req);
        const auto lit = body.find("label");
        if (lit == body.end() || !lit->is_string()) fail(ErrorKind::validation, "label must be a string");
        const auto label = parse_label(lit->get<std::string>());
        if (!label) fail(ErrorKind::validation, "label must be match, nonmatch, unsure or cleared");
        std::string annotator = "anonymous";
        if (auto a = body.find("annotator"); a != body.end()) {
          if (!a->is_string()) fail(ErrorKind::validation, "annotator must be a string");
          annotator = text::squeeze(a->get<std::string>());
          if (annotator.empty() || annotator.size() > 200) fail(ErrorKind::validation, "annotator must be 1-200 characters");
        }
        std::unique_lock lk(mu_);
        const LabelEvent e{pid, *label, annotator, utc_timestamp()};
        append_label_durable(dir_, e);  // durable before acknowledging
        apply_label(session_, e.pair_id, e.label, e.annotator, e.timestamp);
        history_[pid].push_back(session_.label_log.size() - 1);
        json ack = detail::label_event_json(e);
        ack["labeled"] = session_.current_labels().size();
        ack["total"] = session_.pairs.size();
        return ack;
      });
    });

    server_.Get("/api/configs", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        std::shared_lock lk(mu_);
        return configs_json();
      });
    });

    server_.Post("/api/configs/select", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto body = parse_body(req);
        const auto it = body.find("config_id");
        if (it == body.end() || !it->is_number_unsigned()) fail(ErrorKind::validation, "config_id must be a non-negative integer");
        const auto id64 = it->get<std::uint64_t>();
        std::unique_lock lk(mu_);
        if (id64 >= session_.configs.size()) fail(ErrorKind::not_found, "unknown config id " + std::to_string(id64));
        if (session_.current_labels().empty())
          fail(ErrorKind::conflict, "no labels recorded; label pairs before selecting a configuration");
        const auto id = static_cast<std::uint32_t>(id64);
        write_chosen_config(session_, dir_, id);
        {
          std::lock_guard sl(select_mu_);
          selected_ = id;
        }
        select_cv_.notify_all();
        return read_json_file(dir_ / "chosen_config.json");
      });
    });

    server_.Get("/api/export", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        std::shared_lock lk(mu_);
        json log = json::array();
        for (const auto& e : session_.label_log) log.push_back(detail::label_event_json(e));
        json current = json::object();
        for (const auto& [pid, l] : session_.current_labels()) current[std::to_string(pid)] = to_string(l);
        json chosen;
        if (fs::exists(dir_ / "chosen_config.json")) chosen = read_json_file(dir_ / "chosen_config.json");
        return json{{"session", session_json(session_)},
                    {"label_log", log},
                    {"labels", current},
                    {"configs", configs_json()},
                    {"chosen_config", chosen}};
      });
    });
  }

  fs::path dir_;
  TuningSession session_;
  std::vector<std::uint32_t> order_;
  std::vector<std::vector<std::size_t>> history_;  // per pair, indexes into the label log
  mutable std::shared_mutex mu_;
  mutable std::mutex select_mu_;
  std::condition_variable select_cv_;
  std::optional<std::uint32_t> selected_;
  httplib::Server server_;
};

}  // namespace linkforge
