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

#ifndef DARE_EXTERNAL_GENERATOR_H_
#define DARE_EXTERNAL_GENERATOR_H_

#include <sys/types.h>

#include <chrono>
#include <string>
#include <vector>

#include "dare/generator_backend.h"
#include "json.hpp"

namespace dare {

inline constexpr std::string_view kProtocolVersion = "dare-gen/1";

// Generator backend hosted in a child process speaking "dare-gen/1":
// newline-delimited JSON over the child's stdin/stdout, one request and one
// response at a time.
//
//   {"op":"hello"}                                  -> {"ok":true,"protocol":"dare-gen/1"}
//   {"op":"fit_base","corpus":[[...]...]}           -> {"ok":true}
//   {"op":"adapt","class":L,"corpus":[[...]...]}    -> {"ok":true,"adapter_id":ID}
//   {"op":"sample","adapter_id":ID,"n":K,"temperature":T,"top_k":k,
//    "max_tokens":M,"seed":S}                       -> {"ok":true,"samples":[[...]...]}
//   {"op":"loglik","adapter_id":ID,"corpus":[[...]...]} -> {"ok":true,"value":x}
//
// Failures come back as {"ok":false,"error":MSG} and raise ProtocolError.
class ExternalGenerator : public GeneratorBackend {
 public:
  struct Options {
    // Run through /bin/sh -c.
    std::string command;
    std::chrono::milliseconds timeout{std::chrono::seconds(300)};
  };

  // Spawns the child and performs the handshake.
  explicit ExternalGenerator(Options options);
  ~ExternalGenerator() override;

  ExternalGenerator(const ExternalGenerator&) = delete;
  ExternalGenerator& operator=(const ExternalGenerator&) = delete;

  std::string describe() const override;
  void fit_base(const std::vector<TokenSequence>& corpus) override;
  void reset_base(const std::vector<TokenSequence>& corpus) override;
  std::string adapt(const std::string& label,
                    const std::vector<TokenSequence>& corpus) override;
  std::vector<TokenSequence> sample(const std::string& adapter_id, size_t n,
                                    const GeneratorParams& params) override;
  double log_likelihood(const std::string& adapter_id,
                        const std::vector<TokenSequence>& corpus) override;

  // Sends one request and returns the successful response object.
  nlohmann::json request(const nlohmann::json& message);

  // Metadata from the handshake response.
  const nlohmann::json& hello() const { return hello_; }

 private:
  std::string read_line(const std::string& op);
  void terminate();

  Options options_;
  pid_t child_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  nlohmann::json hello_;
  bool base_fitted_ = false;
};

}  // namespace dare

#endif  // DARE_EXTERNAL_GENERATOR_H_
