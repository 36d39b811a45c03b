// Copyright 2026 The draftlat Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "draftlat/external_drafter.h"

#include <cerrno>
#include <cmath>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "nlohmann/json.hpp"

namespace draftlat {

std::string EncodeDraftRequest(TokenSpan context, int num_heads) {
  nlohmann::json json;
  json["context"] = Tokens(context.begin(), context.end());
  json["num_heads"] = num_heads;
  return json.dump();
}

void DecodeDraftRequest(const std::string& line, Tokens* context,
                        int* num_heads) {
  try {
    const nlohmann::json json = nlohmann::json::parse(line);
    *context = json.at("context").get<Tokens>();
    *num_heads = json.at("num_heads").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid draft request: ") + e.what());
  }
  if (*num_heads < 1) {
    throw ParseError("invalid draft request: num_heads must be >= 1");
  }
}

std::string EncodeDraftResponse(
    const std::vector<std::vector<TokenLogit>>& heads) {
  nlohmann::json heads_json = nlohmann::json::array();
  for (const std::vector<TokenLogit>& head : heads) {
    nlohmann::json head_json = nlohmann::json::array();
    for (const TokenLogit& entry : head) {
      head_json.push_back({{"token", entry.token}, {"logit", entry.logit}});
    }
    heads_json.push_back(std::move(head_json));
  }
  nlohmann::json json;
  json["heads"] = std::move(heads_json);
  return json.dump();
}

std::string EncodeDraftError(const std::string& message) {
  nlohmann::json json;
  json["error"] = message;
  return json.dump();
}

std::vector<std::vector<TokenLogit>> DecodeDraftResponse(
    const std::string& line) {
  nlohmann::json json;
  try {
    json = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid draft response: ") + e.what());
  }
  if (json.contains("error")) {
    throw RescoreError("external drafter reported: " +
                       json.at("error").get<std::string>());
  }
  std::vector<std::vector<TokenLogit>> heads;
  try {
    for (const nlohmann::json& head_json : json.at("heads")) {
      std::vector<TokenLogit> head;
      head.reserve(head_json.size());
      for (const nlohmann::json& entry : head_json) {
        head.push_back({entry.at("token").get<TokenId>(),
                        entry.at("logit").get<double>()});
      }
      heads.push_back(std::move(head));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid draft response: ") + e.what());
  }
  return heads;
}

ExternalDrafter::ExternalDrafter(const std::string& command, int num_heads)
    : num_heads_(num_heads) {
  if (num_heads_ < 1) {
    throw ConfigError("external drafter num_heads must be >= 1");
  }
  // A child that exits mid-conversation must surface as an IoError from the
  // next write, not as a fatal SIGPIPE delivered to the whole process.
  signal(SIGPIPE, SIG_IGN);
  int to_child[2];
  int from_child[2];
  if (pipe(to_child) != 0) {
    throw IoError(std::string("pipe failed: ") + std::strerror(errno));
  }
  if (pipe(from_child) != 0) {
    close(to_child[0]);
    close(to_child[1]);
    throw IoError(std::string("pipe failed: ") + std::strerror(errno));
  }

  child_pid_ = fork();
  if (child_pid_ < 0) {
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    throw IoError(std::string("fork failed: ") + std::strerror(errno));
  }
  if (child_pid_ == 0) {
    dup2(to_child[0], STDIN_FILENO);
    dup2(from_child[1], STDOUT_FILENO);
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), (char*)nullptr);
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);
  to_child_ = fdopen(to_child[1], "w");
  from_child_ = fdopen(from_child[0], "r");
  if (to_child_ == nullptr || from_child_ == nullptr) {
    Close();
    throw IoError("fdopen failed for drafter pipes");
  }
}

ExternalDrafter::~ExternalDrafter() { Close(); }

void ExternalDrafter::Close() {
  if (to_child_ != nullptr) {
    fclose(to_child_);
    to_child_ = nullptr;
  }
  if (from_child_ != nullptr) {
    fclose(from_child_);
    from_child_ = nullptr;
  }
  if (child_pid_ > 0) {
    int status = 0;
    waitpid(child_pid_, &status, 0);
    child_pid_ = -1;
  }
}

std::vector<std::vector<TokenLogit>> ExternalDrafter::ProposeBlock(
    TokenSpan context) {
  if (to_child_ == nullptr || from_child_ == nullptr) {
    throw IoError("external drafter process is not running");
  }
  const std::string request = EncodeDraftRequest(context, num_heads_);
  if (fprintf(to_child_, "%s\n", request.c_str()) < 0 ||
      fflush(to_child_) != 0) {
    throw IoError("writing to the external drafter failed; did it exit?");
  }

  std::string line;
  int ch;
  while ((ch = fgetc(from_child_)) != EOF && ch != '\n') {
    line.push_back(static_cast<char>(ch));
  }
  if (ch == EOF && line.empty()) {
    throw IoError("external drafter closed its output before responding");
  }

  std::vector<std::vector<TokenLogit>> heads = DecodeDraftResponse(line);
  if (static_cast<int>(heads.size()) != num_heads_) {
    throw ParseError("external drafter answered with " +
                     std::to_string(heads.size()) + " heads, expected " +
                     std::to_string(num_heads_));
  }
  return heads;
}

}  // namespace draftlat
