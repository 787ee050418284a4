#pragma once

#include <memory>
#include <string>

#include "docnav/agents.hpp"
#include "docnav/retrieval.hpp"

namespace docnav {

// Newline-delimited JSON over a child process's stdio or a TCP connection.
// Endpoint spec: "cmd:<shell command>" or "tcp:<host>:<port>".
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send_line(const std::string& line) = 0;      // appends '\n'
  virtual std::string recv_line(int timeout_ms) = 0;        // throws TransportError
};

std::unique_ptr<Transport> make_transport(const std::string& endpoint);

enum class ImageMode { Path, Base64 };

// Wire protocol, one JSON object per line.
//   env -> agent: {"type":"reset","qa_id",...,"question",...,"budget":T,
//                  "images":[{"role":"overview","k":1,"path"|"b64":...},...]}
//                 {"type":"feedback","turn":t,
//                  "pages":[{"index":i,"label":"Page i:","path"|"b64":...},...],
//                  "reminders":[...],"working_memory":"..."}
//   agent -> env: {"type":"turn","text":"<think>...</think><action>...</action>"}
//   env -> agent: {"type":"done","outcome":"answered"|"no_answer"}
// The transport is opened lazily on the first observation; any failure or
// per-turn timeout surfaces as TransportError and aborts the episode.
std::unique_ptr<AgentPolicy> bridge_agent(const std::string& endpoint,
                                          ImageMode image_mode = ImageMode::Path,
                                          int timeout_ms = 30000);

// External retriever over the same framing:
//   env -> retriever: {"type":"retrieve","query":q,"excluded":[...],"k":k}
//   retriever -> env: {"type":"results","pages":[{"index":i,"score":s},...]}
class BridgeRetriever final : public PageRetriever {
 public:
  BridgeRetriever(std::unique_ptr<Transport> transport, int timeout_ms = 30000);
  std::vector<RankedPage> retrieve(const std::string& query, const std::set<int>& excluded,
                                   int k) override;

 private:
  std::unique_ptr<Transport> transport_;
  int timeout_ms_;
};

class BridgeRetrieverFactory final : public RetrieverFactory {
 public:
  explicit BridgeRetrieverFactory(std::string endpoint, int timeout_ms = 30000)
      : endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms) {}
  std::unique_ptr<PageRetriever> make(const Document& doc, const QAItem& qa) override;

 private:
  std::string endpoint_;
  int timeout_ms_;
};

class BridgeAgentFactory final : public AgentFactory {
 public:
  BridgeAgentFactory(std::string endpoint, ImageMode image_mode, int timeout_ms = 30000)
      : endpoint_(std::move(endpoint)), image_mode_(image_mode), timeout_ms_(timeout_ms) {}
  std::unique_ptr<AgentPolicy> make(const Document& doc, const QAItem& qa) override;

 private:
  std::string endpoint_;
  ImageMode image_mode_;
  int timeout_ms_;
};

// Base64 helpers shared by the wire protocol and its tests.
std::string base64_encode(const std::vector<std::uint8_t>& data);
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace docnav
