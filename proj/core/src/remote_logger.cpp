#include "fogbus/components.hpp"

namespace fogbus {

RemoteLogger::RemoteLogger(Transport& net, Address self, LogStore& store)
    : net_(net), self_(std::move(self)), store_(store) {}

void RemoteLogger::start() {
    net_.bind(self_, [this](const MessageEnvelope& env) { on_message(env); });
}

void RemoteLogger::on_message(const MessageEnvelope& env) {
    auto reply = [&](MessagePayload payload) {
        MessageEnvelope out;
        out.source = self_;
        out.destination = env.source;
        out.sender_id = ComponentId{ComponentKind::RemoteLogger, 0, self_};
        out.payload = std::move(payload);
        net_.send(std::move(out));
    };
    if (const auto* up = std::get_if<LogUpload>(&env.payload)) {
        IngestResult r;
        try {
            r = store_.ingest(up->records);
        } catch (const LoggerUnavailable&) {
            rejected_ += up->records.size();
            return;
        }
        rejected_ += r.rejected.size();
        std::size_t next_bad = 0;
        for (std::size_t i = 0; i < up->records.size(); ++i) {
            if (next_bad < r.rejected.size() && r.rejected[next_bad].first == i) {
                ++next_bad;
                continue;
            }
            view_.apply(up->records[i]);
        }
    } else if (std::holds_alternative<LogQuery>(env.payload)) {
        reply(LogUpload{view_.to_records()});
    } else if (std::holds_alternative<Probe>(env.payload)) {
        reply(on_probe(ComponentKind::RemoteLogger));
    }
}

}  // namespace fogbus
