#include "peasched/runtime.hpp"

#include <algorithm>

namespace peasched {

MessageBus::MessageBus(int n_agents) : live_(static_cast<std::size_t>(n_agents), true) {}

bool MessageBus::publish(const Message& m) {
    std::lock_guard lock(mu_);
    if (m.sender < 0 || m.sender >= static_cast<int>(live_.size())) return false;
    if (!live_[m.sender]) return false;
    if (m.kind == MessageKind::Shutdown) {
        live_[m.sender] = false;
        cv_.notify_all();
        return true;
    }
    Round& r = rounds_[{m.period, m.iteration}];
    if (r.sealed) return false;
    r.inbox.push_back(m);
    cv_.notify_all();
    return true;
}

bool MessageBus::complete_locked(const Round& r) const {
    for (std::size_t i = 0; i < live_.size(); ++i) {
        if (!live_[i]) continue;
        const bool heard = std::any_of(r.inbox.begin(), r.inbox.end(),
                                       [i](const Message& m) { return m.sender == static_cast<int>(i); });
        if (!heard) return false;
    }
    return true;
}

std::vector<Message> MessageBus::seal_locked(Round& r) {
    if (!r.sealed) {
        r.sealed = true;
        std::vector<bool> heard(live_.size(), false);
        for (const auto& m : r.inbox) heard[m.sender] = true;
        for (std::size_t i = 0; i < live_.size(); ++i)
            if (!heard[i]) live_[i] = false;
        std::sort(r.inbox.begin(), r.inbox.end(),
                  [](const Message& a, const Message& b) { return a.sender < b.sender; });
        cv_.notify_all();
    }
    return r.inbox;
}

std::vector<Message> MessageBus::collect(int period, int iteration, std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    Round& r = rounds_[{period, iteration}];
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    cv_.wait_until(lock, deadline, [&] { return r.sealed || complete_locked(r); });
    return seal_locked(r);
}

std::vector<Message> MessageBus::seal(int period, int iteration) {
    std::lock_guard lock(mu_);
    return seal_locked(rounds_[{period, iteration}]);
}

bool MessageBus::is_live(int agent) const {
    std::lock_guard lock(mu_);
    return live_.at(agent);
}

int MessageBus::live_count() const {
    std::lock_guard lock(mu_);
    return static_cast<int>(std::count(live_.begin(), live_.end(), true));
}

void MessageBus::forget_before(int period) {
    std::lock_guard lock(mu_);
    rounds_.erase(rounds_.begin(), rounds_.lower_bound({period, 0}));
}

} // namespace peasched
