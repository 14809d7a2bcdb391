// Copyright 2026 The dare Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dare/external_generator.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "dare/error.h"

namespace dare {

using json = nlohmann::json;

namespace {

std::string truncate(const std::string& s, size_t limit = 200) {
  return s.size() <= limit ? s : s.substr(0, limit) + "...";
}

json corpus_json(const std::vector<TokenSequence>& corpus) {
  json out = json::array();
  for (const auto& sequence : corpus) out.push_back(sequence);
  return out;
}

}  // namespace

ExternalGenerator::ExternalGenerator(Options options)
    : options_(std::move(options)) {
  if (options_.command.empty())
    throw ProtocolError("external generator: empty command");
  // Writes to a dead child must surface as EPIPE, not kill the host.
  ::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2];
  int out_pipe[2];
  if (::pipe(in_pipe) != 0) throw ProtocolError("external generator: pipe failed");
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw ProtocolError("external generator: pipe failed");
  }
  child_ = ::fork();
  if (child_ < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw ProtocolError("external generator: fork failed: " +
                        std::string(std::strerror(errno)));
  }
  if (child_ == 0) {
    ::setpgid(0, 0);
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    ::execl("/bin/sh", "sh", "-c", options_.command.c_str(),
            static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(child_, child_);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);

  try {
    hello_ = request(json{{"op", "hello"}});
  } catch (...) {
    terminate();
    throw;
  }
  if (hello_.value("protocol", "") != kProtocolVersion) {
    const std::string got = hello_.dump();
    terminate();
    throw ProtocolError("external generator: unsupported protocol in handshake: " +
                        truncate(got));
  }
}

ExternalGenerator::~ExternalGenerator() { terminate(); }

void ExternalGenerator::terminate() {
  if (to_child_ >= 0) ::close(to_child_);
  to_child_ = -1;
  if (child_ > 0) {
    // Closed stdin is the shutdown signal; give the child a moment to exit.
    int status = 0;
    bool reaped = false;
    for (int i = 0; i < 50 && !reaped; ++i) {
      if (::waitpid(child_, &status, WNOHANG) == child_) {
        reaped = true;
      } else {
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
    }
    // The shell may have forked the real server; take down the whole group.
    ::kill(-child_, SIGKILL);
    if (!reaped) ::waitpid(child_, &status, 0);
    child_ = -1;
  }
  if (from_child_ >= 0) ::close(from_child_);
  from_child_ = -1;
}

std::string ExternalGenerator::read_line(const std::string& op) {
  const auto deadline = std::chrono::steady_clock::now() + options_.timeout;
  for (;;) {
    const auto newline = buffer_.find('\n');
    if (newline != std::string::npos) {
      std::string line = buffer_.substr(0, newline);
      buffer_.erase(0, newline + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      terminate();
      throw ProtocolError("external generator: timed out waiting for '" + op +
                          "' response");
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError("external generator: poll failed");
    }
    if (ready == 0) continue;
    char chunk[65536];
    const ssize_t got = ::read(from_child_, chunk, sizeof(chunk));
    if (got < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError("external generator: read failed during '" + op + "'");
    }
    if (got == 0) {
      terminate();
      throw ProtocolError("external generator: process exited during '" + op +
                          "' request");
    }
    buffer_.append(chunk, static_cast<size_t>(got));
  }
}

json ExternalGenerator::request(const json& message) {
  const std::string op = message.value("op", "?");
  if (child_ <= 0)
    throw ProtocolError("external generator: session closed before '" + op + "'");

  const std::string line = message.dump() + "\n";
  size_t written = 0;
  while (written < line.size()) {
    const ssize_t n =
        ::write(to_child_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      terminate();
      throw ProtocolError("external generator: process exited during '" + op +
                          "' request");
    }
    written += static_cast<size_t>(n);
  }

  const std::string reply = read_line(op);
  json response;
  try {
    response = json::parse(reply);
  } catch (const json::parse_error&) {
    throw ProtocolError("external generator: malformed response to '" + op +
                        "': " + truncate(reply));
  }
  if (!response.is_object() || !response.contains("ok") ||
      !response["ok"].is_boolean())
    throw ProtocolError("external generator: malformed response to '" + op +
                        "': " + truncate(reply));
  if (!response["ok"].get<bool>())
    throw ProtocolError("external generator: '" + op + "' failed: " +
                        response.value("error", truncate(reply)));
  return response;
}

std::string ExternalGenerator::describe() const {
  return "external(" + options_.command + ")";
}

void ExternalGenerator::fit_base(const std::vector<TokenSequence>& corpus) {
  request(json{{"op", "fit_base"}, {"corpus", corpus_json(corpus)}});
  base_fitted_ = true;
}

void ExternalGenerator::reset_base(const std::vector<TokenSequence>&) {
  // The child starts from its own pretrained prior; there is nothing to
  // reset unless an in-domain fit already happened in this session.
  if (base_fitted_)
    throw ProtocolError(
        "external generator: cannot return to a vanilla base after fit_base");
}

std::string ExternalGenerator::adapt(const std::string& label,
                                     const std::vector<TokenSequence>& corpus) {
  const json response = request(
      json{{"op", "adapt"}, {"class", label}, {"corpus", corpus_json(corpus)}});
  if (!response.contains("adapter_id") || !response["adapter_id"].is_string())
    throw ProtocolError("external generator: 'adapt' response lacks adapter_id: " +
                        truncate(response.dump()));
  return response["adapter_id"].get<std::string>();
}

std::vector<TokenSequence> ExternalGenerator::sample(
    const std::string& adapter_id, size_t n, const GeneratorParams& params) {
  const json response = request(json{{"op", "sample"},
                                     {"adapter_id", adapter_id},
                                     {"n", n},
                                     {"temperature", params.temperature},
                                     {"top_k", params.top_k},
                                     {"max_tokens", params.max_tokens},
                                     {"seed", params.seed}});
  try {
    return response.at("samples").get<std::vector<TokenSequence>>();
  } catch (const json::exception&) {
    throw ProtocolError("external generator: 'sample' response is not a list of "
                        "token arrays: " + truncate(response.dump()));
  }
}

double ExternalGenerator::log_likelihood(
    const std::string& adapter_id, const std::vector<TokenSequence>& corpus) {
  const json response = request(json{{"op", "loglik"},
                                     {"adapter_id", adapter_id},
                                     {"corpus", corpus_json(corpus)}});
  if (!response.contains("value") || !response["value"].is_number())
    throw ProtocolError("external generator: 'loglik' response lacks value: " +
                        truncate(response.dump()));
  return response["value"].get<double>();
}

}  // namespace dare
