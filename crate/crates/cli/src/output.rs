//! Output directory: every file goes through [`Output`] so that the manifest
//! lists it with its checksum.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.csv";

#[derive(Debug)]
pub struct Output {
    dir: PathBuf,
    files: Vec<(String, usize, String)>,
}

impl Output {
    pub fn create(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Output { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        let digest = Sha256::digest(bytes);
        let hex = digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        self.files.retain(|(n, _, _)| n != name);
        self.files.push((name.to_string(), bytes.len(), hex));
        Ok(())
    }

    /// `file,bytes,sha256` sorted by name, then one `timestamp` row (the
    /// only line that changes between identical runs).
    pub fn finish(mut self) -> std::io::Result<Vec<String>> {
        self.files.sort();
        let mut text = String::from("file,bytes,sha256\n");
        for (n, b, h) in &self.files {
            let _ = writeln!(text, "{n},{b},{h}");
        }
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let _ = writeln!(text, "timestamp,{secs},");
        fs::write(self.dir.join(MANIFEST), text)?;
        Ok(self.files.into_iter().map(|f| f.0).collect())
    }
}

/// One gnuplot panel: columns of a CSV against its first column.
pub struct Panel<'a> {
    pub file: &'a str,
    pub title: &'a str,
    pub x: &'a str,
    pub y: &'a str,
    /// `(column number, label)`, 1-based as gnuplot counts.
    pub series: Vec<(usize, &'a str)>,
    pub log_x: bool,
    pub log_y: bool,
}

/// A gnuplot script drawing each panel to `<file stem>.png`.
pub fn gnuplot_script(panels: &[Panel<'_>]) -> String {
    let mut s = String::from("set datafile separator ','\nset terminal pngcairo size 800,600\nset grid\n");
    for p in panels {
        let stem = p.file.trim_end_matches(".csv");
        let _ = writeln!(s, "\nset output '{stem}.png'");
        let _ = writeln!(s, "set title '{}'\nset xlabel '{}'\nset ylabel '{}'", p.title, p.x, p.y);
        s.push_str(if p.log_x { "set logscale x 2\n" } else { "unset logscale x\n" });
        s.push_str(if p.log_y { "set logscale y\n" } else { "unset logscale y\n" });
        let parts: Vec<String> = p
            .series
            .iter()
            .map(|(c, t)| format!("'{}' every ::1 using 1:{c} with linespoints title '{t}'", p.file))
            .collect();
        let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_files_with_digests() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Output::create(dir.path()).unwrap();
        out.write("b.csv", b"x\n1\n").unwrap();
        out.write("a.csv", b"").unwrap();
        let names = out.finish().unwrap();
        assert_eq!(names, vec!["a.csv", "b.csv"]);
        let text = fs::read_to_string(dir.path().join(MANIFEST)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "file,bytes,sha256");
        // sha256 of the empty string
        assert_eq!(lines[1], "a.csv,0,e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
        assert!(lines[3].starts_with("timestamp,"));
    }

    #[test]
    fn script_has_one_plot_per_panel() {
        let p = |f| Panel { file: f, title: "t", x: "n", y: "v", series: vec![(2, "a"), (3, "b")], log_x: true, log_y: false };
        let s = gnuplot_script(&[p("one.csv"), p("two.csv")]);
        assert_eq!(s.matches("\nplot ").count(), 2);
        assert!(s.contains("set output 'two.png'"));
    }
}
