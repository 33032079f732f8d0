#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vacda/core/errors.hpp"
#include "vacda/core/tensor.hpp"

namespace vacda::data {

enum class DomainRole { kSource, kTarget };

enum class ScenarioKind { kCrossPosition, kCrossPerson, kCrossDevice };

enum class DatasetId { kDsads, kOpportunity, kPamap2, kWisdm, kSynthetic };

// One fixed-length 3-channel accelerometer segment.
struct SensorWindow {
    Tensor<float> values;      // [channels x time], channels == 3
    std::optional<int> label;  // class index; absent on unlabeled data
    std::string domain_id;
    std::map<std::string, std::string> meta;  // subject / position / device when known
};

// Counts label reads made through trainer-visible views of target domains.
// Training must leave this at zero; the counter exists to catch regressions.
std::uint64_t target_label_reads();
void reset_target_label_reads();
void count_target_label_read();

// Read-only view of one split as the trainer is allowed to see it: for a
// target domain the labels are withheld (and any attempt to read one is
// counted).
class TrainerView {
public:
    TrainerView() = default;
    TrainerView(const std::vector<SensorWindow>* windows, DomainRole role)
        : windows_(windows), role_(role) {}

    std::size_t size() const { return windows_ ? windows_->size() : 0; }

    const Tensor<float>& values(std::size_t i) const { return (*windows_)[i].values; }

    std::optional<int> label(std::size_t i) const {
        if (role_ == DomainRole::kTarget) {
            count_target_label_read();
            return std::nullopt;
        }
        return (*windows_)[i].label;
    }

    DomainRole role() const { return role_; }

private:
    const std::vector<SensorWindow>* windows_ = nullptr;
    DomainRole role_ = DomainRole::kSource;
};

// All windows of one domain, already split 60-20-20.  Labels are stored when
// the raw data carries them (the eval harness needs target test labels); the
// trainer only ever receives TrainerViews.
struct DomainDataset {
    std::string domain_id;
    DomainRole role = DomainRole::kSource;
    std::vector<std::string> class_set;
    std::vector<SensorWindow> train, val, test;
    // per-channel standardization statistics computed on the train split
    std::vector<double> channel_mean, channel_std;

    TrainerView trainer_train_view() const { return TrainerView(&train, role); }
    TrainerView trainer_val_view() const { return TrainerView(&val, role); }

    // Eval-side accessor for scoring; never routed through the trainer.
    const std::vector<SensorWindow>& eval_split(const std::string& name) const {
        if (name == "train") return train;
        if (name == "val") return val;
        if (name == "test") return test;
        throw Error("unknown split: " + name);
    }
};

// Grouping rule and group assignment for one adaptation task.
struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::kCrossPosition;
    DatasetId dataset = DatasetId::kSynthetic;
    std::string grouping_key;  // position | subject | device
    std::string target_group;
    std::vector<std::string> source_groups;
    std::vector<std::string> activity_filter;  // empty selects the dataset default

    void validate() const {
        if (source_groups.empty()) throw ConfigError("scenario: source_groups must be non-empty");
        for (const auto& s : source_groups)
            if (s == target_group)
                throw ConfigError("scenario: target_group '" + target_group +
                                  "' also listed as a source");
        if (target_group.empty()) throw ConfigError("scenario: target_group must be set");
    }

    std::string task_id() const {
        std::string s;
        for (std::size_t i = 0; i < source_groups.size(); ++i)
            s += (i ? "+" : "") + source_groups[i];
        return s + "->" + target_group;
    }
};

std::string to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(const std::string& s);
std::string to_string(DatasetId d);
DatasetId dataset_id_from_string(const std::string& s);
std::string default_grouping_key(ScenarioKind k);

}  // namespace vacda::data
