#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace allocsim {

// Signals a broken engine/policy precondition (over-allocation, double
// release). Never raised by ordinary request rejection.
class allocation_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// A (processing, bandwidth) quantity pair. Used for demands, capacities and
// running usage alike; comparisons are componentwise.
struct ResourceVector {
    double cpu = 0.0;
    double bw = 0.0;

    constexpr ResourceVector& operator+=(const ResourceVector& o) noexcept {
        cpu += o.cpu;
        bw += o.bw;
        return *this;
    }

    constexpr ResourceVector& operator-=(const ResourceVector& o) noexcept {
        cpu -= o.cpu;
        bw -= o.bw;
        return *this;
    }

    friend constexpr ResourceVector operator+(ResourceVector a, const ResourceVector& b) noexcept {
        a += b;
        return a;
    }

    friend constexpr ResourceVector operator-(ResourceVector a, const ResourceVector& b) noexcept {
        a -= b;
        return a;
    }

    friend constexpr bool operator==(const ResourceVector& a, const ResourceVector& b) noexcept {
        return a.cpu == b.cpu && a.bw == b.bw;
    }

    // true iff this has at least `o` of both types.
    constexpr bool covers(const ResourceVector& o) const noexcept {
        return cpu >= o.cpu && bw >= o.bw;
    }

    constexpr bool non_negative() const noexcept { return cpu >= 0.0 && bw >= 0.0; }

    constexpr ResourceVector scaled(double factor) const noexcept {
        return ResourceVector{cpu * factor, bw * factor};
    }

    friend constexpr ResourceVector min(const ResourceVector& a, const ResourceVector& b) noexcept {
        return ResourceVector{a.cpu < b.cpu ? a.cpu : b.cpu, a.bw < b.bw ? a.bw : b.bw};
    }
};

enum class ResourceType { Processing, Bandwidth };

constexpr double component(const ResourceVector& v, ResourceType t) noexcept {
    return t == ResourceType::Processing ? v.cpu : v.bw;
}

constexpr const char* to_string(ResourceType t) noexcept {
    return t == ResourceType::Processing ? "processing" : "bandwidth";
}

// One facility. Capacity is fixed for the life of a simulation; in_use moves
// only through allocate/release, which keep 0 <= in_use <= capacity.
class Center {
public:
    Center(int id, ResourceVector capacity) : id_(id), capacity_(capacity) {
        if (!capacity.non_negative()) {
            throw allocation_error("Center capacity must be non-negative");
        }
    }

    int id() const noexcept { return id_; }
    const ResourceVector& capacity() const noexcept { return capacity_; }
    const ResourceVector& in_use() const noexcept { return in_use_; }

    ResourceVector available() const noexcept { return capacity_ - in_use_; }

    bool fits(const ResourceVector& demand) const noexcept {
        return available().covers(demand);
    }

    // Takes both types at once; there is no state where only one is held.
    void allocate(const ResourceVector& demand) {
        if (!fits(demand)) {
            throw allocation_error("allocate would exceed capacity at center " + std::to_string(id_));
        }
        in_use_ += demand;
    }

    void release(const ResourceVector& demand) {
        if (!in_use_.covers(demand)) {
            throw allocation_error("release exceeds in-use amount at center " + std::to_string(id_));
        }
        in_use_ -= demand;
    }

private:
    int id_ = 0;
    ResourceVector capacity_;
    ResourceVector in_use_;
};

// One service demand. Holds both required amounts and the holding time; ids
// are assigned in arrival order by the request generator.
struct Request {
    std::uint64_t id = 0;
    int user = 1;  // 1-based user index
    double arrival = 0.0;
    ResourceVector demand;
    double hold = 0.0;
};

enum class OutcomeKind { Accepted, DelayedAccepted, Rejected };

enum class RejectReason {
    None,
    NoFeasibleCenter,    // no center can supply both amounts now
    FillExhausted,       // delayed path closed: no fill budget this block
    DeadlineExceeded,    // no future slot completes within the deadline
};

struct AllocationOutcome {
    OutcomeKind kind = OutcomeKind::Rejected;
    int center = 0;      // 1-based center id, 0 when rejected
    double start = 0.0;  // equals arrival for Accepted, later for DelayedAccepted
    RejectReason reason = RejectReason::None;

    static AllocationOutcome accepted(int center, double start) noexcept {
        return AllocationOutcome{OutcomeKind::Accepted, center, start, RejectReason::None};
    }

    static AllocationOutcome delayed(int center, double start) noexcept {
        return AllocationOutcome{OutcomeKind::DelayedAccepted, center, start, RejectReason::None};
    }

    static AllocationOutcome rejected(RejectReason why) noexcept {
        return AllocationOutcome{OutcomeKind::Rejected, 0, 0.0, why};
    }
};

}  // namespace allocsim
