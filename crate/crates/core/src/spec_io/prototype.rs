use super::{parse_system, SystemSpec};

const PROTOTYPE: &str = include_str!("../../specs/prototype.flow");
const CPU_WRITE: &str = include_str!("../../specs/cpu_write.flow");

/// Source text of the built-in SoC prototype.
pub fn prototype_document() -> &'static str {
    PROTOTYPE
}

/// Source text of the standalone coherent CPU write flow.
pub fn cpu_write_document() -> &'static str {
    CPU_WRITE
}

/// The built-in SoC prototype: two CPUs with caches, bus, memory, and the
/// GFX, Audio and PMU blocks; 32 links and 16 flows started by 5 initiators.
pub fn load_prototype() -> SystemSpec {
    parse_system(PROTOTYPE).expect("shipped prototype is well formed")
}
