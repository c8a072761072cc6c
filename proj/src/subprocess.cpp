#include "skt/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "skt/errors.hpp"

namespace skt::proc {

namespace {

void set_nonblocking(int fd) {
  int flags = fcntl(fd, F_GETFL, 0);
  fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

}  // namespace

RunResult run_command(const std::string& command, std::string_view stdin_data) {
  int in_pipe[2];
  int out_pipe[2];
  int err_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0 || pipe(err_pipe) != 0)
    throw ClientError("pipe() failed: " + std::string(strerror(errno)));

  pid_t pid = fork();
  if (pid < 0) throw ClientError("fork() failed: " + std::string(strerror(errno)));

  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);
    close(err_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }

  close(in_pipe[0]);
  close(out_pipe[1]);
  close(err_pipe[1]);

  // Writing a large stdin while the child writes output can deadlock if done
  // sequentially; multiplex all three streams.
  set_nonblocking(in_pipe[1]);
  set_nonblocking(out_pipe[0]);
  set_nonblocking(err_pipe[0]);
  signal(SIGPIPE, SIG_IGN);

  RunResult result;
  std::size_t written = 0;
  bool stdin_open = true;
  bool stdout_open = true;
  bool stderr_open = true;
  if (stdin_data.empty()) {
    close(in_pipe[1]);
    stdin_open = false;
  }

  char buf[4096];
  while (stdin_open || stdout_open || stderr_open) {
    struct pollfd fds[3];
    nfds_t n = 0;
    int in_slot = -1, out_slot = -1, err_slot = -1;
    if (stdin_open) {
      in_slot = static_cast<int>(n);
      fds[n++] = {in_pipe[1], POLLOUT, 0};
    }
    if (stdout_open) {
      out_slot = static_cast<int>(n);
      fds[n++] = {out_pipe[0], POLLIN, 0};
    }
    if (stderr_open) {
      err_slot = static_cast<int>(n);
      fds[n++] = {err_pipe[0], POLLIN, 0};
    }
    int rc = poll(fds, n, -1);
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (in_slot >= 0 && (fds[in_slot].revents & (POLLOUT | POLLERR | POLLHUP))) {
      if (fds[in_slot].revents & (POLLERR | POLLHUP)) {
        close(in_pipe[1]);
        stdin_open = false;
      } else {
        ssize_t w = write(in_pipe[1], stdin_data.data() + written,
                          stdin_data.size() - written);
        if (w > 0) written += static_cast<std::size_t>(w);
        if (w < 0 && errno != EAGAIN && errno != EINTR) {
          close(in_pipe[1]);
          stdin_open = false;
        }
        if (written == stdin_data.size()) {
          close(in_pipe[1]);
          stdin_open = false;
        }
      }
    }
    if (out_slot >= 0 && (fds[out_slot].revents & (POLLIN | POLLERR | POLLHUP))) {
      ssize_t r = read(out_pipe[0], buf, sizeof(buf));
      if (r > 0) {
        result.out.append(buf, static_cast<std::size_t>(r));
      } else if (r == 0 || (r < 0 && errno != EAGAIN && errno != EINTR)) {
        close(out_pipe[0]);
        stdout_open = false;
      }
    }
    if (err_slot >= 0 && (fds[err_slot].revents & (POLLIN | POLLERR | POLLHUP))) {
      ssize_t r = read(err_pipe[0], buf, sizeof(buf));
      if (r > 0) {
        result.err.append(buf, static_cast<std::size_t>(r));
      } else if (r == 0 || (r < 0 && errno != EAGAIN && errno != EINTR)) {
        close(err_pipe[0]);
        stderr_open = false;
      }
    }
  }

  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else {
    result.exit_code = -1;
  }
  return result;
}

}  // namespace skt::proc
