use std::path::PathBuf;

use weil_core::slstar::{enumerate_group, GroupCtx, GroupTable};

/// On-disk store for enumerated groups. Each file carries a header hash of
/// `(q, n, ε, involution)` and a checksum, both verified on load.
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Cache { dir }
    }

    pub fn enabled(&self) -> bool {
        self.dir.is_some()
    }

    pub fn group_table(&self, ctx: &GroupCtx, budget: usize) -> weil_core::Result<GroupTable> {
        let Some(dir) = &self.dir else {
            return enumerate_group(ctx, budget);
        };
        let name = format!(
            "group-q{}-n{}-{}{}.bin",
            ctx.field().q(),
            ctx.n(),
            ctx.kind().name(),
            if ctx.eps().value() < 0 { "-" } else { "+" }
        );
        let path = dir.join(name);
        if path.exists() {
            eprintln!("loading {}", path.display());
            return GroupTable::load(ctx, &path);
        }
        let table = enumerate_group(ctx, budget)?;
        std::fs::create_dir_all(dir)?;
        let tmp = path.with_extension("tmp");
        table.save(&tmp)?;
        std::fs::rename(&tmp, &path)?;
        eprintln!("cached {}", path.display());
        Ok(table)
    }
}
