#include "axiseg/subprocess_segmenter.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include "axiseg/errors.hpp"
#include "axiseg/log.hpp"
#include "axiseg/seg_protocol.hpp"

namespace axiseg {

namespace {

void ignore_sigpipe_once() {
    // A dying backend must surface as a read/write error, not a signal.
    static const bool done = [] {
        std::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)done;
}

class ExternalSegmenter final : public SliceSegmenter {
public:
    ExternalSegmenter(std::string command, ClassMap classes)
        : command_(std::move(command)), classes_(std::move(classes)) {
        ignore_sigpipe_once();
        spawn();
        handshake();
    }

    ~ExternalSegmenter() override { shutdown(); }

    const ClassMap& classes() const override { return classes_; }

    // Requests are serialized on one stream; never concurrent.
    bool concurrent_safe() const override { return false; }

    ProbImage2D segment(const Image2D& image, std::uint32_t) override {
        if (in_fd_ < 0)
            fail("backend already shut down");
        drain_stderr(); // keep the child's stderr pipe from filling up

        const std::uint64_t id = next_id_++;
        std::string frame = request_line(id, image.h, image.w);
        const auto payload = floats_to_le(image.px.data(), image.px.size());
        frame.append(reinterpret_cast<const char*>(payload.data()), payload.size());
        if (!write_all(in_fd_, frame.data(), frame.size()))
            fail("write to backend failed (process gone?)");

        std::optional<std::string> line;
        try {
            line = read_line(out_fd_);
        } catch (const FormatError& e) {
            fail(e.what());
        }
        if (!line)
            fail("backend closed its output before replying to frame " +
                 std::to_string(id));

        std::uint64_t got = 0;
        try {
            got = parse_response_id(*line);
        } catch (const FormatError& e) {
            fail(e.what());
        }
        if (got != id)
            fail("backend replied to frame " + std::to_string(got) + ", expected " +
                 std::to_string(id));

        const std::size_t n =
            static_cast<std::size_t>(image.h) * image.w * classes_.count();
        std::vector<std::uint8_t> bytes(n * 4);
        if (!read_all(out_fd_, bytes.data(), bytes.size()))
            fail("short read: backend sent fewer than " + std::to_string(n) +
                 " float32 values for frame " + std::to_string(id));

        ProbImage2D out = make_prob_image2d(image.h, image.w, classes_.count());
        le_to_floats(bytes.data(), n, out.px.data());
        validate_backend_output(out, image, classes_.count());
        return out;
    }

private:
    void spawn() {
        int to_child[2], from_child[2], err_pipe[2];
        if (::pipe(to_child) != 0 || ::pipe(from_child) != 0 || ::pipe(err_pipe) != 0)
            throw BackendError("pipe() failed: " + std::string(std::strerror(errno)));

        pid_ = ::fork();
        if (pid_ < 0)
            throw BackendError("fork() failed: " + std::string(std::strerror(errno)));

        if (pid_ == 0) {
            ::dup2(to_child[0], STDIN_FILENO);
            ::dup2(from_child[1], STDOUT_FILENO);
            ::dup2(err_pipe[1], STDERR_FILENO);
            ::close(to_child[0]);
            ::close(to_child[1]);
            ::close(from_child[0]);
            ::close(from_child[1]);
            ::close(err_pipe[0]);
            ::close(err_pipe[1]);
            ::execl("/bin/sh", "sh", "-c", command_.c_str(), nullptr);
            ::_exit(127);
        }

        ::close(to_child[0]);
        ::close(from_child[1]);
        ::close(err_pipe[1]);
        in_fd_ = to_child[1];
        out_fd_ = from_child[0];
        err_fd_ = err_pipe[0];
        ::fcntl(err_fd_, F_SETFL, O_NONBLOCK);
    }

    void handshake() {
        const std::string hello = handshake_line(classes_.count());
        if (!write_all(in_fd_, hello.data(), hello.size()))
            fail("could not send handshake");
        std::optional<std::string> reply;
        try {
            reply = read_line(out_fd_);
        } catch (const FormatError& e) {
            fail(e.what());
        }
        if (!reply)
            fail("backend exited before completing the handshake");
        std::string detail;
        if (!parse_handshake_reply(*reply, classes_.count(), &detail))
            fail("handshake rejected: " + detail);
    }

    // Pull whatever the child has written to stderr, keep the last 4 KiB.
    void drain_stderr() {
        if (err_fd_ < 0) return;
        char buf[1024];
        for (;;) {
            const ssize_t k = ::read(err_fd_, buf, sizeof(buf));
            if (k <= 0) break;
            stderr_tail_.append(buf, static_cast<std::size_t>(k));
            if (stderr_tail_.size() > 4096)
                stderr_tail_.erase(0, stderr_tail_.size() - 4096);
        }
    }

    [[noreturn]] void fail(const std::string& why) {
        drain_stderr();
        std::string msg = "backend '" + command_ + "': " + why;
        if (!stderr_tail_.empty())
            msg += "\nbackend stderr tail:\n" + stderr_tail_;
        close_fds();
        reap(/*force=*/true);
        throw BackendError(msg, stderr_tail_);
    }

    void close_fds() {
        if (in_fd_ >= 0) ::close(in_fd_);
        if (out_fd_ >= 0) ::close(out_fd_);
        in_fd_ = out_fd_ = -1;
    }

    void reap(bool force) {
        if (pid_ <= 0) return;
        int status = 0;
        if (force) {
            // Give it a brief moment, then kill.
            for (int i = 0; i < 50; ++i) {
                const pid_t r = ::waitpid(pid_, &status, WNOHANG);
                if (r == pid_) {
                    pid_ = -1;
                    return;
                }
                ::usleep(2000);
            }
            ::kill(pid_, SIGKILL);
        }
        ::waitpid(pid_, &status, 0);
        if (WIFEXITED(status) && WEXITSTATUS(status) != 0)
            log_warn("backend '" + command_ + "' exited with status " +
                     std::to_string(WEXITSTATUS(status)));
        pid_ = -1;
    }

    void shutdown() {
        drain_stderr();
        close_fds();
        if (pid_ > 0) reap(/*force=*/true);
        if (err_fd_ >= 0) ::close(err_fd_);
        err_fd_ = -1;
    }

    std::string command_;
    ClassMap classes_;
    pid_t pid_ = -1;
    int in_fd_ = -1;
    int out_fd_ = -1;
    int err_fd_ = -1;
    std::uint64_t next_id_ = 1;
    std::string stderr_tail_;
};

} // namespace

std::unique_ptr<SliceSegmenter> make_external_segmenter(std::string command,
                                                        ClassMap classes) {
    return std::make_unique<ExternalSegmenter>(std::move(command), std::move(classes));
}

} // namespace axiseg
