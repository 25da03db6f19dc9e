// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <coroutine>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

namespace tensim {

// Virtual time in integer picoseconds.
using Picos = std::int64_t;

inline Picos ns_to_ps(double ns) { return static_cast<Picos>(std::llround(ns * 1000.0)); }
inline double ps_to_ns(Picos p) { return static_cast<double>(p) / 1000.0; }
inline double ps_to_s(Picos p) { return static_cast<double>(p) * 1e-12; }

inline constexpr Picos kForever = std::numeric_limits<Picos>::max();

namespace detail {

struct PromiseBase {
    std::coroutine_handle<> continuation;
    std::exception_ptr error;

    std::suspend_always initial_suspend() noexcept { return {}; }

    struct Final {
        bool await_ready() noexcept { return false; }
        template <typename P>
        std::coroutine_handle<> await_suspend(std::coroutine_handle<P> h) noexcept {
            auto c = h.promise().continuation;
            if (c) return c;
            return std::noop_coroutine();
        }
        void await_resume() noexcept {}
    };
    Final final_suspend() noexcept { return {}; }
    void unhandled_exception() { error = std::current_exception(); }
};

template <typename Promise>
class TaskHandle {
public:
    using handle_type = std::coroutine_handle<Promise>;

    TaskHandle() = default;
    explicit TaskHandle(handle_type h) : h_(h) {}
    TaskHandle(TaskHandle&& o) noexcept : h_(std::exchange(o.h_, {})) {}
    TaskHandle& operator=(TaskHandle&& o) noexcept {
        if (this != &o) {
            if (h_) h_.destroy();
            h_ = std::exchange(o.h_, {});
        }
        return *this;
    }
    TaskHandle(const TaskHandle&) = delete;
    TaskHandle& operator=(const TaskHandle&) = delete;
    ~TaskHandle() {
        if (h_) h_.destroy();
    }

    bool valid() const { return static_cast<bool>(h_); }
    bool done() const { return h_ && h_.done(); }
    handle_type handle() const { return h_; }
    std::exception_ptr error() const { return h_ ? h_.promise().error : nullptr; }

    bool await_ready() const noexcept { return false; }
    std::coroutine_handle<> await_suspend(std::coroutine_handle<> cont) noexcept {
        h_.promise().continuation = cont;
        return h_;
    }

protected:
    handle_type h_;
};

}  // namespace detail

// Lazily started coroutine; awaiting it runs the body inside the awaiting task.
template <typename T = void>
class [[nodiscard]] Task;

template <typename T>
class [[nodiscard]] Task {
public:
    struct promise_type : detail::PromiseBase {
        std::optional<T> value;
        Task get_return_object() { return Task(std::coroutine_handle<promise_type>::from_promise(*this)); }
        void return_value(T v) { value = std::move(v); }
    };

    explicit Task(std::coroutine_handle<promise_type> h) : t_(h) {}

    bool await_ready() const noexcept { return false; }
    std::coroutine_handle<> await_suspend(std::coroutine_handle<> c) noexcept { return t_.await_suspend(c); }
    T await_resume() {
        auto& p = t_.handle().promise();
        if (p.error) std::rethrow_exception(p.error);
        return std::move(*p.value);
    }

private:
    detail::TaskHandle<promise_type> t_;
};

template <>
class [[nodiscard]] Task<void> {
public:
    struct promise_type : detail::PromiseBase {
        Task get_return_object() { return Task(std::coroutine_handle<promise_type>::from_promise(*this)); }
        void return_void() {}
    };

    Task() = default;
    explicit Task(std::coroutine_handle<promise_type> h) : t_(h) {}

    bool valid() const { return t_.valid(); }
    bool done() const { return t_.done(); }
    std::coroutine_handle<> handle() const { return t_.handle(); }
    std::exception_ptr error() const { return t_.error(); }

    bool await_ready() const noexcept { return false; }
    std::coroutine_handle<> await_suspend(std::coroutine_handle<> c) noexcept { return t_.await_suspend(c); }
    void await_resume() {
        if (auto e = t_.error()) std::rethrow_exception(e);
    }

private:
    detail::TaskHandle<promise_type> t_;
};

enum class StallKind { Cb, Semaphore, Noc };

struct TaskRecord {
    std::string name;
    Task<> task;
    bool done = false;
    Picos finish = 0;
    Picos busy = 0;
    Picos stall_cb = 0;
    Picos stall_sem = 0;
    Picos stall_noc = 0;
    // set while parked on a rendezvous
    Picos blocked_since = -1;
    StallKind blocked_kind = StallKind::Cb;
    std::string blocked_on;
};

// A parked coroutine waiting for a rendezvous condition.
struct Waiter {
    int task = -1;
    std::coroutine_handle<> handle;
    std::uint64_t need = 0;
};

class Scheduler {
public:
    Picos now() const { return now_; }
    int current() const { return current_; }

    int spawn(Task<> task, std::string name);

    // Current task sleeps for dt; counted as busy time or NoC stall.
    void sleep(std::coroutine_handle<> h, Picos dt, bool noc_stall);
    // Current task parks; the owner of the condition calls wake().
    Waiter park(std::coroutine_handle<> h, StallKind kind, std::string what, std::uint64_t need = 0);
    void wake(const Waiter& w);

    // Runs to quiescence. Throws Deadlock if tasks remain blocked, or if time passes the deadline.
    void run(Picos deadline = kForever);

    const std::vector<TaskRecord>& tasks() const { return tasks_; }
    std::uint64_t events_processed() const { return events_; }

private:
    struct Event {
        Picos t;
        std::uint64_t seq;
        int task;
        std::coroutine_handle<> h;
        bool operator>(const Event& o) const { return t != o.t ? t > o.t : seq > o.seq; }
    };

    void push(Picos t, int task, std::coroutine_handle<> h);
    [[noreturn]] void throw_deadlock(const std::string& reason) const;

    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
    std::vector<TaskRecord> tasks_;
    Picos now_ = 0;
    int current_ = -1;
    std::uint64_t seq_ = 0;
    std::uint64_t events_ = 0;
};

// Awaitable that advances the current task's clock.
struct [[nodiscard]] Delay {
    Scheduler* sched;
    Picos dt;
    bool noc_stall = false;

    bool await_ready() const noexcept { return dt <= 0; }
    void await_suspend(std::coroutine_handle<> h) const { sched->sleep(h, dt, noc_stall); }
    void await_resume() const noexcept {}
};

}  // namespace tensim
