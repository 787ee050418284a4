#include "docnav/bridge.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "docnav/overview.hpp"
#include "docnav/png_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace docnav {
namespace {

constexpr const char* kB64Chars =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

// Shared line-buffered reader over a poll-able fd.
std::string read_line_fd(int fd, int timeout_ms, std::string& buffer, const char* what) {
  while (true) {
    const auto nl = buffer.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    pollfd pfd{fd, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, timeout_ms);
    if (rc == 0) throw TransportError(std::string(what) + ": timeout waiting for reply");
    if (rc < 0) throw TransportError(std::string(what) + ": poll failed: " + std::strerror(errno));
    char chunk[4096];
    const ssize_t n = ::read(fd, chunk, sizeof(chunk));
    if (n == 0) throw TransportError(std::string(what) + ": connection closed");
    if (n < 0) throw TransportError(std::string(what) + ": read failed: " + std::strerror(errno));
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

void write_all_fd(int fd, const std::string& line, const char* what) {
  std::string payload = line;
  payload += '\n';
  std::size_t off = 0;
  while (off < payload.size()) {
    const ssize_t n = ::write(fd, payload.data() + off, payload.size() - off);
    if (n <= 0) throw TransportError(std::string(what) + ": write failed: " + std::strerror(errno));
    off += static_cast<std::size_t>(n);
  }
}

class StdioChildTransport final : public Transport {
 public:
  explicit StdioChildTransport(const std::string& command) {
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
      throw TransportError("bridge: pipe failed: " + std::string(std::strerror(errno)));
    }
    pid_ = ::fork();
    if (pid_ < 0) throw TransportError("bridge: fork failed");
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    out_fd_ = to_child[1];
    in_fd_ = from_child[0];
    ::signal(SIGPIPE, SIG_IGN);
  }

  ~StdioChildTransport() override {
    if (out_fd_ >= 0) ::close(out_fd_);
    if (in_fd_ >= 0) ::close(in_fd_);
    if (pid_ > 0) {
      int status = 0;
      if (::waitpid(pid_, &status, WNOHANG) == 0) {
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
      }
    }
  }

  void send_line(const std::string& line) override { write_all_fd(out_fd_, line, "bridge(cmd)"); }
  std::string recv_line(int timeout_ms) override {
    return read_line_fd(in_fd_, timeout_ms, buffer_, "bridge(cmd)");
  }

 private:
  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
};

class TcpTransport final : public Transport {
 public:
  TcpTransport(const std::string& host, const std::string& port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || !res) {
      throw TransportError("bridge: cannot resolve " + host + ":" + port);
    }
    int fd = -1;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
      fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
      ::close(fd);
      fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw TransportError("bridge: cannot connect to " + host + ":" + port);
    fd_ = fd;
    ::signal(SIGPIPE, SIG_IGN);
  }

  ~TcpTransport() override {
    if (fd_ >= 0) ::close(fd_);
  }

  void send_line(const std::string& line) override { write_all_fd(fd_, line, "bridge(tcp)"); }
  std::string recv_line(int timeout_ms) override {
    return read_line_fd(fd_, timeout_ms, buffer_, "bridge(tcp)");
  }

 private:
  int fd_ = -1;
  std::string buffer_;
};

json image_payload(const std::vector<std::uint8_t>& png, const std::string& stem, ImageMode mode,
                   const std::string& existing_path, fs::path* scratch_dir) {
  json j;
  if (mode == ImageMode::Base64) {
    j["b64"] = base64_encode(png);
    return j;
  }
  if (!existing_path.empty()) {
    j["path"] = existing_path;
    return j;
  }
  if (scratch_dir->empty()) {
    *scratch_dir = fs::temp_directory_path() /
                   ("docnav_bridge_" + std::to_string(::getpid()) + "_" +
                    std::to_string(reinterpret_cast<std::uintptr_t>(scratch_dir)));
    fs::create_directories(*scratch_dir);
  }
  const fs::path path = *scratch_dir / (stem + ".png");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(png.data()), static_cast<std::streamsize>(png.size()));
  j["path"] = path.string();
  return j;
}

class BridgeAgent final : public AgentPolicy {
 public:
  BridgeAgent(std::string endpoint, ImageMode image_mode, int timeout_ms)
      : endpoint_(std::move(endpoint)), image_mode_(image_mode), timeout_ms_(timeout_ms) {}

  ~BridgeAgent() override {
    std::error_code ec;
    if (!scratch_dir_.empty()) fs::remove_all(scratch_dir_, ec);
  }

  std::string act(const Observation& obs) override {
    if (!transport_) transport_ = make_transport(endpoint_);

    json msg;
    if (const auto* init = std::get_if<InitialObservation>(&obs)) {
      msg["type"] = "reset";
      msg["qa_id"] = init->qa_id;
      msg["question"] = init->question;
      msg["budget"] = init->budget;
      msg["images"] = json::array();
      for (const auto& img : init->overview.images) {
        json payload = image_payload(png_encode(img.render()),
                                     "overview_" + std::to_string(img.group_index), image_mode_, "",
                                     &scratch_dir_);
        payload["role"] = "overview";
        payload["k"] = img.group_index;
        msg["images"].push_back(std::move(payload));
      }
    } else {
      const auto& aug = std::get<AugmentedObservation>(obs);
      msg["type"] = "feedback";
      msg["turn"] = turn_;
      msg["pages"] = json::array();
      for (const auto& page : aug.feedback.pages) {
        const std::string existing = page.page->image.from_disk() ? page.page->image.path() : "";
        json payload = image_payload(page.page->image.png_bytes(),
                                     "page_" + std::to_string(page.index), image_mode_, existing,
                                     &scratch_dir_);
        payload["index"] = page.index;
        payload["label"] = page.label;
        msg["pages"].push_back(std::move(payload));
      }
      msg["reminders"] = aug.feedback.reminders;
      if (aug.feedback.format_notice) msg["format_notice"] = *aug.feedback.format_notice;
      msg["working_memory"] = aug.working_memory;
    }
    transport_->send_line(msg.dump());
    ++turn_;

    const std::string reply = transport_->recv_line(timeout_ms_);
    json parsed;
    try {
      parsed = json::parse(reply);
    } catch (const json::exception& e) {
      throw TransportError(std::string("bridge: reply is not JSON: ") + e.what());
    }
    if (parsed.value("type", "") != "turn" || !parsed.contains("text")) {
      throw TransportError("bridge: expected {\"type\":\"turn\",\"text\":...}");
    }
    return parsed.at("text").get<std::string>();
  }

  void on_done(const std::string& outcome) override {
    if (!transport_) return;
    try {
      transport_->send_line(json{{"type", "done"}, {"outcome", outcome}}.dump());
    } catch (const TransportError&) {
      // episode is over; a vanished peer is not an error
    }
  }

 private:
  std::string endpoint_;
  ImageMode image_mode_;
  int timeout_ms_;
  std::unique_ptr<Transport> transport_;
  fs::path scratch_dir_;
  int turn_ = 0;
};

}  // namespace

std::unique_ptr<Transport> make_transport(const std::string& endpoint) {
  if (endpoint.rfind("cmd:", 0) == 0) {
    return std::make_unique<StdioChildTransport>(endpoint.substr(4));
  }
  if (endpoint.rfind("tcp:", 0) == 0) {
    const std::string rest = endpoint.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos) {
      throw TransportError("bridge: tcp endpoint must be tcp:<host>:<port>");
    }
    return std::make_unique<TcpTransport>(rest.substr(0, colon), rest.substr(colon + 1));
  }
  throw TransportError("bridge: unknown endpoint (expected cmd:<command> or tcp:<host>:<port>): " +
                       endpoint);
}

std::unique_ptr<AgentPolicy> bridge_agent(const std::string& endpoint, ImageMode image_mode,
                                          int timeout_ms) {
  return std::make_unique<BridgeAgent>(endpoint, image_mode, timeout_ms);
}

BridgeRetriever::BridgeRetriever(std::unique_ptr<Transport> transport, int timeout_ms)
    : transport_(std::move(transport)), timeout_ms_(timeout_ms) {}

std::vector<RankedPage> BridgeRetriever::retrieve(const std::string& query,
                                                  const std::set<int>& excluded, int k) {
  json msg;
  msg["type"] = "retrieve";
  msg["query"] = query;
  msg["excluded"] = std::vector<int>(excluded.begin(), excluded.end());
  msg["k"] = k;
  transport_->send_line(msg.dump());
  const json reply = json::parse(transport_->recv_line(timeout_ms_), nullptr, false);
  if (reply.is_discarded() || reply.value("type", "") != "results") {
    throw TransportError("bridge: expected {\"type\":\"results\",\"pages\":[...]}");
  }
  std::vector<RankedPage> out;
  for (const json& p : reply.at("pages")) {
    const int index = p.at("index").get<int>();
    if (excluded.count(index)) continue;  // exclusion soundness is enforced locally
    out.push_back({index, p.value("score", 0.0)});
    if (static_cast<int>(out.size()) == k) break;
  }
  return out;
}

std::unique_ptr<PageRetriever> BridgeRetrieverFactory::make(const Document&, const QAItem&) {
  return std::make_unique<BridgeRetriever>(make_transport(endpoint_), timeout_ms_);
}

std::unique_ptr<AgentPolicy> BridgeAgentFactory::make(const Document&, const QAItem&) {
  return bridge_agent(endpoint_, image_mode_, timeout_ms_);
}

std::string base64_encode(const std::vector<std::uint8_t>& data) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < data.size(); i += 3) {
    std::uint32_t chunk = static_cast<std::uint32_t>(data[i]) << 16;
    if (i + 1 < data.size()) chunk |= static_cast<std::uint32_t>(data[i + 1]) << 8;
    if (i + 2 < data.size()) chunk |= data[i + 2];
    out += kB64Chars[(chunk >> 18) & 63];
    out += kB64Chars[(chunk >> 12) & 63];
    out += i + 1 < data.size() ? kB64Chars[(chunk >> 6) & 63] : '=';
    out += i + 2 < data.size() ? kB64Chars[chunk & 63] : '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<std::uint8_t> out;
  int acc = 0, bits = 0;
  for (char c : text) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const int v = value_of(c);
    if (v < 0) throw std::invalid_argument("base64: invalid character");
    acc = (acc << 6) | v;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

}  // namespace docnav
