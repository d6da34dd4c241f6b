use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use oldroyd::study::{run_study, write_csv, StudyConfig, StudyOutput};

/// Convergence and stability studies for the Oldroyd model of order one.
///
/// Flags override values read from `--config`.
#[derive(Debug, Parser)]
#[command(name = "oldroyd-study", version, allow_negative_numbers = true)]
struct Cli {
    /// Plain-text key=value file with the same keys as the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// spatial | temporal | longtime | stability
    #[arg(long)]
    study: Option<String>,
    /// 1 (smooth data) or 2 (nonsmooth data)
    #[arg(long)]
    example: Option<String>,
    /// p2p0 | mini
    #[arg(long)]
    element: Option<String>,
    /// Comma-separated mesh levels n (h = 1/n)
    #[arg(long)]
    levels: Option<String>,
    /// h2 | sqrt | ch=<c> | fixed=<k> | list=<k1,k2,...>
    #[arg(long = "k-rule")]
    k_rule: Option<String>,
    /// Final time; a comma-separated list for the long-time study
    #[arg(long = "T")]
    t_final: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    /// Output CSV path (stdout when absent)
    #[arg(long)]
    out: Option<String>,
    #[arg(long = "picard-tol")]
    picard_tol: Option<String>,
    #[arg(long = "picard-max")]
    picard_max: Option<String>,
}

impl Cli {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        [
            ("study", &self.study),
            ("example", &self.example),
            ("element", &self.element),
            ("levels", &self.levels),
            ("k-rule", &self.k_rule),
            ("T", &self.t_final),
            ("mu", &self.mu),
            ("gamma", &self.gamma),
            ("delta", &self.delta),
            ("out", &self.out),
            ("picard-tol", &self.picard_tol),
            ("picard-max", &self.picard_max),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect()
    }
}

fn run(cli: &Cli) -> oldroyd::Result<()> {
    let mut config = StudyConfig::default();
    if let Some(path) = &cli.config {
        config.apply_file(path)?;
    }
    for (key, value) in cli.overrides() {
        config.apply(key, value)?;
    }
    let output = run_study(&config)?;
    match &config.out {
        Some(path) => write_csv(&output, path)?,
        None => print!("{}", output.to_csv()),
    }
    if let StudyOutput::Longtime(tables) = &output {
        eprintln!("L2 rate spread across final times: {:.4}", tables.l2_rate_spread());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("oldroyd-study: {}", err.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("oldroyd-study").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_become_overrides() {
        let cli = parse(&["--study", "temporal", "--T", "2", "--k-rule", "list=1/4,1/16", "--mu", "-1"]);
        assert_eq!(
            cli.overrides(),
            vec![("study", "temporal"), ("k-rule", "list=1/4,1/16"), ("T", "2"), ("mu", "-1")]
        );
        assert!(parse(&[]).overrides().is_empty());
        assert!(Cli::try_parse_from(["oldroyd-study", "--refine", "2"]).is_err());
    }

    #[test]
    fn flags_override_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("study.cfg");
        let out = dir.path().join("out.csv");
        std::fs::write(&cfg, format!("levels = 2,4\nT = 0.25\nelement = mini\nout = {}\n", out.display())).unwrap();
        let cli = parse(&["--config", cfg.to_str().unwrap(), "--element", "p2p0", "--k-rule", "h2"]);
        run(&cli).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("h,l2_err"));
    }

    #[test]
    fn bad_values_are_reported() {
        for args in [&["--element", "q1"][..], &["--gamma", "x"], &["--T", "1", "--k-rule", "fixed=0.3"]] {
            assert!(run(&parse(args)).is_err(), "{args:?}");
        }
    }
}
