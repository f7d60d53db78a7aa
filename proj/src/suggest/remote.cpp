#include <cstdlib>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "atgforge/suggest/suggest.hpp"

namespace atgforge {

namespace {

struct SplitUrl {
  std::string base;
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  std::size_t scheme = url.find("://");
  std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  std::size_t slash = url.find('/', host_start);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

// Releases a semaphore slot on scope exit.
struct SlotGuard {
  std::counting_semaphore<1024>& sem;
  ~SlotGuard() { sem.release(); }
};

}  // namespace

RemoteSuggester::RemoteSuggester(RemoteConfig config)
    : config_(std::move(config)), inflight_(std::max(1, config_.max_inflight)) {
  if (config_.url.empty()) throw std::invalid_argument("remote suggester needs suggest.remote_url");
}

RemoteSuggester::~RemoteSuggester() { wait_for_refresh(); }

std::vector<CandidateTactic> RemoteSuggester::suggest(const std::vector<std::string>& goals, std::size_t t) {
  if (goals.empty() || t == 0) return {};
  SplitUrl url = split_url(config_.url);
  json body{{"prompt", format_prompt(goals)}, {"n", t}, {"max_tokens", config_.max_tokens}};

  inflight_.acquire();
  SlotGuard guard{inflight_};
  httplib::Client client(url.base);
  auto secs = static_cast<time_t>(config_.timeout_secs);
  auto usecs = static_cast<time_t>((config_.timeout_secs - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  auto res = client.Post(url.path, body.dump(), "application/json");
  if (!res) throw RemoteUnavailable("request to " + config_.url + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw RemoteUnavailable("server returned HTTP " + std::to_string(res->status));

  json reply;
  try {
    reply = json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw RemoteUnavailable(std::string("unparseable reply: ") + e.what());
  }
  std::string text;
  if (reply.contains("text")) {
    text = reply.at("text").get<std::string>();
  } else if (reply.contains("completions")) {
    for (const auto& line : reply.at("completions")) text += line.get<std::string>() + "\n";
  } else {
    throw RemoteUnavailable("reply has neither 'text' nor 'completions'");
  }
  return rank_candidates(parse_completion(text), t);
}

void RemoteSuggester::refresh(const std::vector<StateTacticPair>& pairs) {
  if (pairs.empty() || config_.export_path.empty()) return;
  write_finetune_records(config_.export_path, finetune_records(pairs));
  if (config_.refresh_hook.empty()) return;
  std::string command = config_.refresh_hook + " '" + config_.export_path.string() + "'";
  std::lock_guard lock(hook_mutex_);
  hooks_.push_back(std::async(std::launch::async, [command] {
    int rc = std::system(command.c_str());
    if (rc != 0) spdlog::warn("refresh hook exited with status {}", rc);
  }));
}

void RemoteSuggester::wait_for_refresh() {
  std::lock_guard lock(hook_mutex_);
  for (auto& h : hooks_) h.wait();
  hooks_.clear();
}

}  // namespace atgforge
