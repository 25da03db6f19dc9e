// SPDX-License-Identifier: Apache-2.0
#include "tensim/sim.hpp"

#include <sstream>

#include "tensim/error.hpp"

namespace tensim {

int Scheduler::spawn(Task<> task, std::string name) {
    int id = static_cast<int>(tasks_.size());
    TaskRecord rec;
    rec.name = std::move(name);
    rec.task = std::move(task);
    tasks_.push_back(std::move(rec));
    push(now_, id, tasks_.back().task.handle());
    return id;
}

void Scheduler::push(Picos t, int task, std::coroutine_handle<> h) { queue_.push(Event{t, seq_++, task, h}); }

void Scheduler::sleep(std::coroutine_handle<> h, Picos dt, bool noc_stall) {
    TaskRecord& r = tasks_[current_];
    if (noc_stall) {
        r.stall_noc += dt;
    } else {
        r.busy += dt;
    }
    push(now_ + dt, current_, h);
}

Waiter Scheduler::park(std::coroutine_handle<> h, StallKind kind, std::string what, std::uint64_t need) {
    TaskRecord& r = tasks_[current_];
    r.blocked_since = now_;
    r.blocked_kind = kind;
    r.blocked_on = std::move(what);
    return Waiter{current_, h, need};
}

void Scheduler::wake(const Waiter& w) {
    TaskRecord& r = tasks_[w.task];
    Picos waited = now_ - r.blocked_since;
    switch (r.blocked_kind) {
        case StallKind::Cb: r.stall_cb += waited; break;
        case StallKind::Semaphore: r.stall_sem += waited; break;
        case StallKind::Noc: r.stall_noc += waited; break;
    }
    r.blocked_since = -1;
    r.blocked_on.clear();
    push(now_, w.task, w.handle);
}

void Scheduler::throw_deadlock(const std::string& reason) const {
    std::ostringstream os;
    os << reason << " at t=" << ps_to_ns(now_) << " ns; blocked tasks:";
    for (const TaskRecord& r : tasks_) {
        if (r.done) continue;
        os << " [" << r.name << ": " << (r.blocked_on.empty() ? "runnable" : r.blocked_on) << "]";
    }
    throw Error(ErrorKind::Deadlock, os.str());
}

void Scheduler::run(Picos deadline) {
    while (!queue_.empty()) {
        Event ev = queue_.top();
        queue_.pop();
        if (ev.t > deadline) throw_deadlock("virtual-time limit exceeded");
        now_ = ev.t;
        current_ = ev.task;
        ++events_;
        ev.h.resume();
        TaskRecord& r = tasks_[ev.task];
        if (r.task.done()) {
            r.done = true;
            r.finish = now_;
            if (auto e = r.task.error()) {
                try {
                    std::rethrow_exception(e);
                } catch (const Error& err) {
                    throw Error(err.kind(), "in " + r.name + " at t=" + std::to_string(ps_to_ns(now_)) + " ns: " + err.detail());
                }
            }
        }
    }
    current_ = -1;
    for (const TaskRecord& r : tasks_) {
        if (!r.done) throw_deadlock("no runnable task");
    }
}

}  // namespace tensim
