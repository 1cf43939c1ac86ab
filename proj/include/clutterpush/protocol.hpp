#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "clutterpush/env.hpp"

namespace cpush {

// Newline-delimited JSON over a stream socket, one request per line and one
// response line per request.
//   {"cmd":"spec"}                       -> protocol description
//   {"cmd":"reset","config":{...}}       -> {"obs":[49],"info":{...}}
//   {"cmd":"step","action":[dx,dy,dth]}  -> {"obs","reward","done","info"}
//   {"cmd":"close"}                      -> {"ok":true}, then the connection closes
// Failures answer {"error":{"code":...,"message":...}} and close the
// connection.
inline constexpr const char* kProtocolName = "clutterpush-env";
inline constexpr int kProtocolVersion = 1;

nlohmann::json protocol_spec(const EpisodeConfig& defaults);
nlohmann::json observation_json(const Observation& obs);
nlohmann::json step_json(const StepResult& result);

// Transport-free request handler; one per connection.
class ProtocolSession {
public:
    ProtocolSession(EpisodeConfig defaults, EncoderSpec encoder);

    // Returns the response line (without newline).
    std::string handle(const std::string& line);
    // True once the connection should be closed (close or error).
    [[nodiscard]] bool finished() const noexcept { return finished_; }
    [[nodiscard]] const PushEnv& env() const noexcept { return env_; }

private:
    nlohmann::json dispatch(const nlohmann::json& req);

    EpisodeConfig defaults_;
    PushEnv env_;
    bool finished_{false};
};

// Overrides `defaults` with the fields present in a reset request's config.
EpisodeConfig merge_config(const EpisodeConfig& defaults, const nlohmann::json& overrides);

// TCP server on 127.0.0.1 (or any address); each connection gets its own
// session and thread.
class ProtocolServer {
public:
    ProtocolServer(EpisodeConfig defaults, EncoderSpec encoder);
    ~ProtocolServer();
    ProtocolServer(const ProtocolServer&) = delete;
    ProtocolServer& operator=(const ProtocolServer&) = delete;

    // Binds and starts accepting; port 0 picks a free port. Returns the port.
    // Throws Error(io_failure).
    int start(int port, bool loopback_only = true);
    // Blocks until stop() is called from elsewhere.
    void wait();
    void stop();
    [[nodiscard]] int port() const noexcept { return port_; }

private:
    void accept_loop();

    EpisodeConfig defaults_;
    EncoderSpec encoder_;
    int listen_fd_{-1};
    int port_{0};
    std::atomic<bool> running_{false};
    std::thread acceptor_;
    std::vector<std::thread> workers_;
    std::vector<int> client_fds_;
    std::mutex mutex_;
};

// Minimal blocking line client used by tests and the agent policy.
class LineClient {
public:
    // Throws Error(io_failure).
    LineClient(const std::string& host, int port);
    ~LineClient();
    LineClient(const LineClient&) = delete;
    LineClient& operator=(const LineClient&) = delete;

    void send_line(const std::string& line);
    // nullopt on timeout; throws Error(io_failure) when the peer closed.
    std::optional<std::string> read_line(int timeout_ms);
    std::string request(const std::string& line, int timeout_ms = 10000);

private:
    int fd_{-1};
    std::string buffer_;
};

} // namespace cpush
