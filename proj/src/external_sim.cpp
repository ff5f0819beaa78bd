#include "ccyopt/external_sim.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

namespace ccyopt {

namespace {

std::string cache_key(const Vector& x, const Vector& xi) {
  std::string key;
  key.resize(static_cast<size_t>(x.size() + xi.size()) * sizeof(double));
  std::memcpy(key.data(), x.data(), static_cast<size_t>(x.size()) * sizeof(double));
  std::memcpy(key.data() + static_cast<size_t>(x.size()) * sizeof(double), xi.data(),
              static_cast<size_t>(xi.size()) * sizeof(double));
  return key;
}

std::string format_rows(const Matrix& xp, int d1, int d2) {
  std::string text;
  for (int i = 0; i < d1; ++i) text += (i ? ",x" : "x") + std::to_string(i + 1);
  for (int i = 0; i < d2; ++i) text += ",xi" + std::to_string(i + 1);
  text += "\n";
  char buffer[64];
  for (Index r = 0; r < xp.rows(); ++r) {
    for (Index c = 0; c < xp.cols(); ++c) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", xp(r, c));
      if (c) text += ',';
      text += buffer;
    }
    text += '\n';
  }
  return text;
}

[[noreturn]] void protocol_error(const std::string& message) {
  throw SimulationError("external simulator: " + message);
}

}  // namespace

ExternalSimulator::ExternalSimulator(Options options) : options_(std::move(options)) {
  if (options_.command.empty()) throw ConfigError("external simulator: empty command");
  if (options_.design_dim < 1 || options_.noise_dim < 1) {
    throw ConfigError("external simulator: dimensions must be positive");
  }
  if (options_.metric_names.empty()) {
    throw ConfigError("external simulator: metric names required");
  }
}

Matrix ExternalSimulator::run_child(const Matrix& xp) const {
  int to_child[2], from_child[2];
  if (pipe(to_child) != 0 || pipe(from_child) != 0) {
    protocol_error("pipe() failed");
  }
  const pid_t pid = fork();
  if (pid < 0) protocol_error("fork() failed");
  if (pid == 0) {
    dup2(to_child[0], STDIN_FILENO);
    dup2(from_child[1], STDOUT_FILENO);
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    execl("/bin/sh", "sh", "-c", options_.command.c_str(), nullptr);
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);

  const std::string input = format_rows(xp, options_.design_dim, options_.noise_dim);
  fcntl(to_child[1], F_SETFL, O_NONBLOCK);
  fcntl(from_child[0], F_SETFL, O_NONBLOCK);

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::milliseconds(static_cast<long>(options_.timeout_s * 1000));
  std::string output;
  size_t written = 0;
  bool write_done = false;
  bool read_done = false;
  char buffer[65536];
  while (!read_done) {
    struct pollfd fds[2];
    int nfds = 0;
    if (!write_done) fds[nfds++] = {to_child[1], POLLOUT, 0};
    fds[nfds++] = {from_child[0], POLLIN, 0};
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                               deadline - std::chrono::steady_clock::now())
                               .count();
    if (remaining <= 0) {
      kill(pid, SIGKILL);
      waitpid(pid, nullptr, 0);
      close(to_child[1]);
      close(from_child[0]);
      protocol_error("timeout after " + std::to_string(options_.timeout_s) + " s");
    }
    const int ready = poll(fds, static_cast<nfds_t>(nfds), static_cast<int>(remaining));
    if (ready < 0) {
      if (errno == EINTR) continue;
      kill(pid, SIGKILL);
      waitpid(pid, nullptr, 0);
      protocol_error("poll() failed");
    }
    for (int i = 0; i < nfds; ++i) {
      if (!write_done && fds[i].fd == to_child[1] && (fds[i].revents & (POLLOUT | POLLERR))) {
        const ssize_t n = write(to_child[1], input.data() + written, input.size() - written);
        if (n > 0) written += static_cast<size_t>(n);
        if (written == input.size() || (n < 0 && errno != EAGAIN && errno != EINTR)) {
          close(to_child[1]);
          write_done = true;
        }
      }
      if (fds[i].fd == from_child[0] && (fds[i].revents & (POLLIN | POLLHUP))) {
        const ssize_t n = read(from_child[0], buffer, sizeof(buffer));
        if (n > 0) {
          output.append(buffer, static_cast<size_t>(n));
        } else if (n == 0) {
          read_done = true;
        } else if (errno != EAGAIN && errno != EINTR) {
          read_done = true;
        }
      }
    }
  }
  if (!write_done) close(to_child[1]);
  close(from_child[0]);
  int status = 0;
  waitpid(pid, &status, 0);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    protocol_error("child exited with status " +
                   std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));
  }

  // parse: header then one CSV row per input row
  std::istringstream stream(output);
  std::string line;
  if (!std::getline(stream, line)) protocol_error("no output header");
  const Index n_metrics = static_cast<Index>(options_.metric_names.size());
  Matrix metrics(xp.rows(), n_metrics);
  for (Index r = 0; r < xp.rows(); ++r) {
    if (!std::getline(stream, line)) {
      protocol_error("missing output row " + std::to_string(r + 1));
    }
    std::istringstream fields(line);
    std::string field;
    for (Index c = 0; c < n_metrics; ++c) {
      if (!std::getline(fields, field, ',')) {
        protocol_error("row " + std::to_string(r + 1) + ": expected " +
                       std::to_string(n_metrics) + " fields");
      }
      char* end = nullptr;
      const double value = std::strtod(field.c_str(), &end);
      if (end == field.c_str() || !std::isfinite(value)) {
        protocol_error("row " + std::to_string(r + 1) + ": non-finite or malformed value '" +
                       field + "'");
      }
      metrics(r, c) = value;
    }
  }
  return metrics;
}

Vector ExternalSimulator::evaluate(const Vector& x, const Vector& xi) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const std::string key = cache_key(x, xi);
  if (cache_enabled_) {
    const auto hit = cache_.find(key);
    if (hit != cache_.end()) return hit->second;
  }
  Matrix xp(1, x.size() + xi.size());
  xp.row(0).head(x.size()) = x.transpose();
  xp.row(0).tail(xi.size()) = xi.transpose();
  const Matrix metrics = run_child(xp);
  if (cache_enabled_) cache_[key] = metrics.row(0).transpose();
  return metrics.row(0).transpose();
}

Matrix ExternalSimulator::evaluate_batch(const Matrix& xp) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const int d1 = options_.design_dim;
  Matrix out(xp.rows(), static_cast<Index>(options_.metric_names.size()));
  std::vector<Index> missing;
  for (Index r = 0; r < xp.rows(); ++r) {
    const std::string key =
        cache_key(xp.row(r).head(d1).transpose(), xp.row(r).tail(xp.cols() - d1).transpose());
    const auto hit = cache_enabled_ ? cache_.find(key) : cache_.end();
    if (cache_enabled_ && hit != cache_.end()) {
      out.row(r) = hit->second.transpose();
    } else {
      missing.push_back(r);
    }
  }
  if (!missing.empty()) {
    Matrix subset(static_cast<Index>(missing.size()), xp.cols());
    for (Index i = 0; i < subset.rows(); ++i) subset.row(i) = xp.row(missing[static_cast<size_t>(i)]);
    const Matrix fresh = run_child(subset);
    for (Index i = 0; i < subset.rows(); ++i) {
      const Index r = missing[static_cast<size_t>(i)];
      out.row(r) = fresh.row(i);
      if (cache_enabled_) {
        cache_[cache_key(xp.row(r).head(d1).transpose(),
                         xp.row(r).tail(xp.cols() - d1).transpose())] = fresh.row(i).transpose();
      }
    }
  }
  return out;
}

}  // namespace ccyopt
