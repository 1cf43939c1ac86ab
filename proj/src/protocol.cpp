#include "clutterpush/protocol.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "clutterpush/bench.hpp"
#include "clutterpush/error.hpp"

namespace cpush {

using nlohmann::json;

namespace {

json error_json(std::string_view code, const std::string& message) {
    return {{"error", {{"code", std::string(code)}, {"message", message}}}};
}

bool send_all(int fd, const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        off += static_cast<std::size_t>(n);
    }
    return true;
}

void serve_connection(int fd, EpisodeConfig defaults, EncoderSpec encoder) {
    std::optional<ProtocolSession> session;
    std::string buffer;
    char chunk[4096];
    bool open = true;
    while (open) {
        const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        buffer.append(chunk, static_cast<std::size_t>(n));
        std::size_t nl;
        while (open && (nl = buffer.find('\n')) != std::string::npos) {
            std::string line = buffer.substr(0, nl);
            buffer.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            std::string reply;
            if (!session) {
                try {
                    session.emplace(defaults, encoder);
                } catch (const Error& e) {
                    reply = error_json(to_string(e.code()), e.what()).dump();
                    send_all(fd, reply + "\n");
                    open = false;
                    break;
                }
            }
            reply = session->handle(line);
            if (!send_all(fd, reply + "\n") || session->finished()) open = false;
        }
    }
    ::shutdown(fd, SHUT_RDWR);
}

} // namespace

json observation_json(const Observation& obs) { return json(std::vector<double>(obs.begin(), obs.end())); }

json step_json(const StepResult& r) {
    return {{"obs", observation_json(r.obs)},
            {"reward",
             {{"dist", r.reward.r_dist},
              {"collision", r.reward.r_collision},
              {"touch", r.reward.r_touch},
              {"total", r.reward.r_total}}},
            {"done", r.done},
            {"info",
             {{"contact", r.info.contact},
              {"collision", r.info.collision},
              {"object_collision", r.info.object_collision},
              {"ee_collision", r.info.ee_collision},
              {"oob", r.info.out_of_bounds},
              {"goal_reached", r.info.goal_reached},
              {"timeout", r.info.timeout},
              {"replan_failed", r.info.replan_failed},
              {"path_len", r.info.path_length},
              {"goal_distance", r.info.goal_distance},
              {"step", r.info.step}}}};
}

json protocol_spec(const EpisodeConfig& defaults) {
    using namespace obs_layout;
    json layout = json::array({
        {{"name", "latent"}, {"offset", kLatent}, {"size", 32}},
        {{"name", "ee_pose_rel"}, {"offset", kEePose}, {"size", 5}},
        {{"name", "joint_angles"}, {"offset", kJoints}, {"size", 6}},
        {{"name", "sg_now"}, {"offset", kSgNow}, {"size", 2}},
        {{"name", "sg_lagged"}, {"offset", kSgLagged}, {"size", 2}},
        {{"name", "contact_flag"}, {"offset", kContact}, {"size", 1}},
        {{"name", "goal_distance"}, {"offset", kGoalDistance}, {"size", 1}},
    });
    return {{"protocol", kProtocolName},
            {"version", kProtocolVersion},
            {"obs_dim", kSize},
            {"obs_layout_version", obs_layout::kVersion},
            {"obs_layout", std::move(layout)},
            {"action_dim", 3},
            {"action_caps", {{"dxy_max", defaults.dynamics.caps.dxy_max}, {"dtheta_max", defaults.dynamics.caps.dtheta_max}}},
            {"commands", json::array({"spec", "reset", "step", "close"})},
            {"defaults", to_json(defaults)}};
}

EpisodeConfig merge_config(const EpisodeConfig& defaults, const json& overrides) {
    if (!overrides.is_object()) throw Error(ErrorCode::protocol_error, "config must be an object");
    json base = to_json(defaults);
    if (overrides.contains("scenario")) base.erase("scenario");  // a scenario replaces, never merges
    base.merge_patch(overrides);
    return episode_config_from_json(base);
}

ProtocolSession::ProtocolSession(EpisodeConfig defaults, EncoderSpec encoder)
    : defaults_(std::move(defaults)), env_(std::move(encoder)) {}

std::string ProtocolSession::handle(const std::string& line) {
    if (finished_) return error_json("protocol_error", "session closed").dump();
    json req;
    try {
        req = json::parse(line);
    } catch (const json::exception& e) {
        finished_ = true;
        return error_json("protocol_error", std::string("malformed JSON: ") + e.what()).dump();
    }
    try {
        return dispatch(req).dump();
    } catch (const Error& e) {
        finished_ = true;
        return error_json(to_string(e.code()), e.what()).dump();
    } catch (const json::exception& e) {
        finished_ = true;
        return error_json("protocol_error", e.what()).dump();
    }
}

json ProtocolSession::dispatch(const json& req) {
    if (!req.is_object() || !req.contains("cmd") || !req.at("cmd").is_string())
        throw Error(ErrorCode::protocol_error, "request needs a string 'cmd'");
    const std::string cmd = req.at("cmd").get<std::string>();
    if (cmd == "spec") return protocol_spec(defaults_);
    if (cmd == "reset") {
        const EpisodeConfig cfg = req.contains("config") ? merge_config(defaults_, req.at("config")) : defaults_;
        const Observation obs = env_.reset(cfg);
        return {{"obs", observation_json(obs)},
                {"done", false},
                {"info", {{"path_len", env_.path().length}, {"goal_distance", env_.normalization().initial_goal_distance}, {"step", 0}}}};
    }
    if (cmd == "step") {
        const json& a = req.at("action");
        if (!a.is_array() || a.size() != 3) throw Error(ErrorCode::protocol_error, "action must be [dx, dy, dtheta]");
        for (const json& v : a) {
            if (!v.is_number()) throw Error(ErrorCode::protocol_error, "action entries must be numbers");
        }
        return step_json(env_.step({a[0].get<double>(), a[1].get<double>(), a[2].get<double>()}));
    }
    if (cmd == "close") {
        finished_ = true;
        return {{"ok", true}};
    }
    throw Error(ErrorCode::protocol_error, "unknown cmd '" + cmd + "'");
}

// Server --------------------------------------------------------------------

ProtocolServer::ProtocolServer(EpisodeConfig defaults, EncoderSpec encoder)
    : defaults_(std::move(defaults)), encoder_(std::move(encoder)) {
    validate_encoder(encoder_);
}

ProtocolServer::~ProtocolServer() { stop(); }

int ProtocolServer::start(int port, bool loopback_only) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw Error(ErrorCode::io_failure, std::string("socket: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    addr.sin_addr.s_addr = htonl(loopback_only ? INADDR_LOOPBACK : INADDR_ANY);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 16) < 0) {
        const std::string why = std::strerror(errno);
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw Error(ErrorCode::io_failure, "cannot listen on port " + std::to_string(port) + ": " + why);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
    return port_;
}

void ProtocolServer::accept_loop() {
    while (running_) {
        pollfd pfd{listen_fd_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, 100);
        if (ready <= 0) continue;
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) continue;
        std::lock_guard lock(mutex_);
        client_fds_.push_back(fd);
        workers_.emplace_back(serve_connection, fd, defaults_, encoder_);
    }
}

void ProtocolServer::wait() {
    while (running_) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

void ProtocolServer::stop() {
    const bool was_running = running_.exchange(false);
    if (acceptor_.joinable()) acceptor_.join();
    std::vector<std::thread> workers;
    {
        std::lock_guard lock(mutex_);
        for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
        workers.swap(workers_);
    }
    for (std::thread& t : workers) t.join();
    {
        std::lock_guard lock(mutex_);
        for (int fd : client_fds_) ::close(fd);
        client_fds_.clear();
    }
    if (listen_fd_ >= 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
    (void)was_running;
}

// Client --------------------------------------------------------------------

LineClient::LineClient(const std::string& host, int port) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || res == nullptr)
        throw Error(ErrorCode::io_failure, "cannot resolve " + host);
    fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    const bool ok = fd_ >= 0 && ::connect(fd_, res->ai_addr, res->ai_addrlen) == 0;
    ::freeaddrinfo(res);
    if (!ok) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
        throw Error(ErrorCode::io_failure, "cannot connect to " + host + ":" + std::to_string(port));
    }
}

LineClient::~LineClient() {
    if (fd_ >= 0) ::close(fd_);
}

void LineClient::send_line(const std::string& line) {
    if (!send_all(fd_, line + "\n")) throw Error(ErrorCode::io_failure, "send failed");
}

std::optional<std::string> LineClient::read_line(int timeout_ms) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    while (true) {
        const std::size_t nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) return std::nullopt;
        pollfd pfd{fd_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
        if (ready < 0 && errno == EINTR) continue;
        if (ready <= 0) return std::nullopt;
        char chunk[4096];
        const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) throw Error(ErrorCode::io_failure, "connection closed by peer");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

std::string LineClient::request(const std::string& line, int timeout_ms) {
    send_line(line);
    auto reply = read_line(timeout_ms);
    if (!reply) throw Error(ErrorCode::policy_timeout, "no reply within " + std::to_string(timeout_ms) + " ms");
    return *reply;
}

// Agent policy ----------------------------------------------------------------

ProtocolAgentPolicy::ProtocolAgentPolicy(std::string host, int port, std::chrono::milliseconds timeout)
    : host_(std::move(host)), port_(port), timeout_(timeout) {}

ProtocolAgentPolicy::~ProtocolAgentPolicy() = default;

void ProtocolAgentPolicy::begin(const PushEnv&) {
    if (!client_) client_ = std::make_unique<LineClient>(host_, port_);
}

ActionDelta ProtocolAgentPolicy::act(const PushEnv& env, const Observation& obs) {
    if (!client_) client_ = std::make_unique<LineClient>(host_, port_);
    const json req{{"obs", observation_json(obs)}, {"step", env.steps()}};
    const std::string reply = client_->request(req.dump(), static_cast<int>(timeout_.count()));
    try {
        const json j = json::parse(reply);
        const json& a = j.at("action");
        return {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
    } catch (const json::exception& e) {
        throw Error(ErrorCode::protocol_error, std::string("agent reply: ") + e.what());
    }
}

} // namespace cpush
