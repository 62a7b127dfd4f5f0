use std::fmt::Write;

use super::SystemSpec;

/// Renders a spec in canonical form: declarations sorted by id, one place
/// per line, channel omitted when zero.
pub fn serialize_system(spec: &SystemSpec) -> String {
    let mut out = String::new();
    let topo = spec.topology();
    // Writing into a String cannot fail.
    let _ = writeln!(out, "system {}", spec.name());
    out.push('\n');
    let components: Vec<&str> = topo.components().iter().map(|c| c.as_str()).collect();
    let _ = writeln!(out, "component {}", components.join(" "));
    out.push('\n');
    for link in topo.links() {
        let _ = write!(out, "link {} {} -> {}", link.id, link.src, link.dest);
        if link.channel != 0 {
            let _ = write!(out, " channel {}", link.channel);
        }
        out.push('\n');
    }
    for flow in spec.flows() {
        let _ = writeln!(out, "\nflow {}", flow.id());
        for p in flow.places() {
            let _ = write!(out, "  place {p}");
            if flow.initial_marking().contains(p) {
                out.push_str(" initial");
            }
            if flow.end_marking().contains(p) {
                out.push_str(" end");
            }
            out.push('\n');
        }
        for t in flow.transitions() {
            let link = spec.link_of(&t.event).expect("every event has a link");
            let _ = writeln!(
                out,
                "  transition {} pre {{{}}} post {{{}}} event {} on {}",
                t.id,
                join(t.preset.iter()),
                join(t.postset.iter()),
                t.event,
                link
            );
        }
    }
    if !spec.initiators().is_empty() {
        out.push('\n');
    }
    for init in spec.initiators() {
        let _ = writeln!(
            out,
            "initiator {} flows {{{}}}",
            init.component,
            join(init.flows.iter())
        );
    }
    out
}

fn join<T: std::fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items.map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}
