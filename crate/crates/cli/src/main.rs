use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use collabnet::model::{self, Dataset, Format};
use collabnet::pipeline::{self, AnalysisConfig, ProjectAnalysis, LEADER_GROUPING};
use collabnet::report::{
    self, InputDigest, LeaderComparison, Measure, ReportMetadata, RunSettings, TransitionReport,
};
use collabnet::roles::{ContributionProfile, RoleLabel, Thresholds};
use collabnet::stats::{BarnardOptions, MwuMethod, MwuOptions, Tails, DEFAULT_GRID_RESOLUTION};
use collabnet::synth::{self, PlantedCohortSpec};
use collabnet::{Error, Result};

/// Student–subtask network analysis of collaborative project work.
#[derive(Debug, Parser)]
#[command(name = "collabnet", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full pipeline and write report.json, per-team DOT files and
    /// per-project quadrant SVGs.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        options: AnalysisArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Mann-Whitney U comparison of two groups of students on one measure.
    Stats {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        options: AnalysisArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Project to analyze.
        #[arg(long)]
        project: String,
        /// Measure to compare: quantity or heterogeneity.
        #[arg(long)]
        measure: Measure,
        /// How students are split into two samples.
        #[arg(long, default_value = LEADER_GROUPING, value_parser = [LEADER_GROUPING])]
        grouping: String,
    },
    /// Role transitions between two projects, their 2x2 contingency table
    /// and Barnard's exact test.
    Transitions {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        options: AnalysisArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Earlier project.
        #[arg(long)]
        from: String,
        /// Later project.
        #[arg(long)]
        to: String,
    },
    /// Generate a synthetic cohort with planted roles from a cohort spec.
    Synth {
        /// Cohort specification (JSON).
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
        /// Override the seed given in the spec.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Dataset directory (csv), or dataset.json file or its directory (json).
    #[arg(long)]
    input: PathBuf,
    /// Input format.
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output directory.
    #[arg(long, env = "COLLABNET_OUT", default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AnalysisArgs {
    /// Quantity threshold separating low from high contribution.
    #[arg(long, default_value_t = 0.5)]
    quantity_cut: f64,
    /// Heterogeneity threshold separating low from high contribution.
    #[arg(long, default_value_t = 0.5)]
    heterogeneity_cut: f64,
    /// Tail convention for p-values [default: one for Mann-Whitney, two for Barnard].
    #[arg(long)]
    tails: Option<Tails>,
    /// Apply a continuity correction to the Mann-Whitney normal score.
    #[arg(long)]
    continuity: bool,
    /// Use the exact null distribution of U instead of the normal approximation.
    #[arg(long)]
    exact_mwu: bool,
    /// Step of the nuisance-parameter grid in Barnard's test.
    #[arg(long, default_value_t = DEFAULT_GRID_RESOLUTION)]
    barnard_grid: f64,
}

impl AnalysisArgs {
    fn config(&self) -> Result<AnalysisConfig> {
        let mwu_defaults = MwuOptions::default();
        let barnard_defaults = BarnardOptions::default();
        Ok(AnalysisConfig {
            thresholds: Thresholds::new(self.quantity_cut, self.heterogeneity_cut)?,
            mann_whitney: MwuOptions {
                tails: self.tails.unwrap_or(mwu_defaults.tails),
                continuity_correction: self.continuity,
                method: if self.exact_mwu { MwuMethod::Exact } else { MwuMethod::Normal },
                ..mwu_defaults
            },
            barnard: BarnardOptions {
                tails: self.tails.unwrap_or(barnard_defaults.tails),
                grid_resolution: self.barnard_grid,
            },
        })
    }
}

impl InputArgs {
    fn format(&self) -> Format {
        self.format.parse().expect("restricted by clap")
    }

    fn load(&self) -> Result<Dataset> {
        Dataset::load(&self.input, self.format())
    }

    fn digests(&self) -> Result<Vec<InputDigest>> {
        match self.format() {
            Format::Csv => [model::SUBTASKS_FILE, model::TEAMS_FILE, model::INTERACTIONS_FILE]
                .iter()
                .map(|name| InputDigest::of_file(self.input.join(name)))
                .collect(),
            Format::Json => {
                let file = if self.input.is_dir() {
                    self.input.join(model::DATASET_FILE)
                } else {
                    self.input.clone()
                };
                Ok(vec![InputDigest::of_file(file)?])
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Analyze { input, options, output } => cmd_analyze(input, options, &output.out),
        Command::Stats {
            input,
            options,
            output,
            project,
            measure,
            grouping: _,
        } => cmd_stats(input, options, &output.out, project, *measure),
        Command::Transitions {
            input,
            options,
            output,
            from,
            to,
        } => cmd_transitions(input, options, &output.out, from, to),
        Command::Synth { spec, output, seed } => cmd_synth(spec, &output.out, *seed),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if let Error::Validation(violations) = &err {
                for v in violations {
                    eprintln!("  {v}");
                }
            }
            ExitCode::from(if err.is_io() { 2 } else { 1 })
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    log::info!("writing {}", path.display());
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

/// Validates the dataset and builds profiles for every project, without
/// running any test.
fn profile_projects(dataset: &Dataset, thresholds: &Thresholds) -> Result<Vec<ProjectAnalysis>> {
    let violations = model::validate_dataset(dataset);
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    dataset
        .projects
        .values()
        .map(|spec| pipeline::analyze_project(dataset, spec, thresholds))
        .collect()
}

fn find_project<'a>(projects: &'a [ProjectAnalysis], id: &str) -> Result<&'a ProjectAnalysis> {
    projects
        .iter()
        .find(|p| p.project_id() == id)
        .ok_or_else(|| Error::UnknownProject {
            id: id.to_string(),
            known: projects.iter().map(|p| p.project_id().to_string()).collect(),
        })
}

fn role_table(projects: &[ProjectAnalysis]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<10} {:<10} {:<10} {:<6} {:>8} {:>8}  role",
        "project", "team", "student", "leader", "quantity", "hetero"
    )
    .unwrap();
    for project in projects {
        for team in &project.teams {
            for p in &team.profiles {
                writeln!(
                    out,
                    "{:<10} {:<10} {:<10} {:<6} {:>8.4} {:>8.4}  {}",
                    p.project_id,
                    p.team_id,
                    p.student_id,
                    if p.is_assigned_leader { "yes" } else { "" },
                    p.quantity,
                    p.heterogeneity,
                    p.role
                )
                .unwrap();
            }
        }
        let profiles = project.profiles();
        let counts: Vec<String> = RoleLabel::ALL
            .iter()
            .map(|role| format!("{} {}", profiles.iter().filter(|p| p.role == *role).count(), role))
            .collect();
        writeln!(out, "{}: {}", project.project_id(), counts.join(", ")).unwrap();
    }
    out
}

fn cmd_analyze(input: &InputArgs, options: &AnalysisArgs, out: &Path) -> Result<()> {
    let config = options.config()?;
    let dataset = input.load()?;
    let analysis = pipeline::analyze(&dataset, &config)?;
    let metadata = ReportMetadata {
        tool: "collabnet".to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        settings: RunSettings {
            input_format: input.format(),
            thresholds: config.thresholds,
            mann_whitney: config.mann_whitney,
            barnard: config.barnard,
        },
        inputs: input.digests()?,
        dataset: dataset.metadata.clone(),
    };
    let bundle = analysis.report(metadata);

    create_dir(out)?;
    write_file(&out.join("report.json"), &bundle.to_json_string())?;
    let mut previous: Option<Vec<ContributionProfile>> = None;
    for project in &analysis.projects {
        for team in &project.teams {
            let dot = report::export_network_dot(&team.network, &project.spec, &team.profiles)?;
            let name = format!(
                "{}_{}.dot",
                report::file_stem(project.project_id()),
                report::file_stem(&team.roster.team_id)
            );
            write_file(&out.join(name), &dot)?;
        }
        let profiles = project.profiles();
        let arrows = previous
            .as_deref()
            .map(|before| report::transition_arrows(before, &profiles))
            .unwrap_or_default();
        let svg = report::export_quadrant_svg(project.project_id(), &profiles, &config.thresholds, &arrows);
        let name = format!("quadrant_{}.svg", report::file_stem(project.project_id()));
        write_file(&out.join(name), &svg)?;
        previous = Some(profiles);
    }

    print!("{}", role_table(&analysis.projects));
    for test in &analysis.tests {
        match (&test.comparison, &test.skipped) {
            (Some(c), _) => println!(
                "{} {} leaders vs non-leaders: U = {}, Z = {:.3}, p = {:.4} ({}-sided), r = {:.3}",
                test.project_id, test.measure, c.test.u, c.test.z, c.test.p, c.test.tails, c.test.r
            ),
            (None, Some(reason)) => println!("{} {}: skipped ({reason})", test.project_id, test.measure),
            (None, None) => {}
        }
    }
    for t in &analysis.transitions {
        print_transition(t);
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_stats(input: &InputArgs, options: &AnalysisArgs, out: &Path, project_id: &str, measure: Measure) -> Result<()> {
    let config = options.config()?;
    let dataset = input.load()?;
    let projects = profile_projects(&dataset, &config.thresholds)?;
    let project = find_project(&projects, project_id)?;
    let comparison = pipeline::leader_comparison(project, measure, &config.mann_whitney)?;
    let t = &comparison.test;

    println!("Mann-Whitney U, {LEADER_GROUPING}, project {project_id}, {measure}");
    println!(
        "  n:      {} {}, {} {}",
        comparison.n_a, comparison.label_a, comparison.n_b, comparison.label_b
    );
    println!(
        "  median: {:.4} {}, {:.4} {}",
        comparison.median_a, comparison.label_a, comparison.median_b, comparison.label_b
    );
    println!("  U = {}, Z = {:.4} ({} method)", t.u, t.z, method_name(t.method));
    println!("  p (one-sided) = {:.6}", t.p_one_sided);
    println!("  p (two-sided) = {:.6}", t.p_two_sided);
    println!("  r = {:.4}", t.r);

    let record = LeaderComparison {
        project_id: project_id.to_string(),
        measure,
        grouping: LEADER_GROUPING.to_string(),
        comparison: Some(comparison),
        skipped: None,
    };
    create_dir(out)?;
    let name = format!("stats_{}_{measure}.json", report::file_stem(project_id));
    write_file(&out.join(name), &to_json(&record))
}

fn method_name(method: MwuMethod) -> &'static str {
    match method {
        MwuMethod::Normal => "normal",
        MwuMethod::Exact => "exact",
    }
}

fn print_transition(t: &TransitionReport) {
    let c = &t.contingency;
    println!("transitions {} -> {} ({} students)", t.from_project, t.to_project, c.total());
    println!("                       role changed  unchanged");
    println!("  leadership changed   {:>12}  {:>9}", c.a, c.b);
    println!("  leadership same      {:>12}  {:>9}", c.c, c.d);
    if t.barnard.is_empty() {
        println!(
            "  T = 0, Barnard's test not run: {}",
            t.barnard_skipped.as_deref().unwrap_or("no result")
        );
    }
    for b in &t.barnard {
        println!(
            "  Barnard ({}-sided): T = {:.3}, p = {:.4}, nuisance argmax = {:.4}",
            b.tails, b.t, b.p, b.nuisance_argmax
        );
    }
    if !t.only_before.is_empty() {
        println!("  only in {}: {}", t.from_project, t.only_before.join(", "));
    }
    if !t.only_after.is_empty() {
        println!("  only in {}: {}", t.to_project, t.only_after.join(", "));
    }
}

fn cmd_transitions(input: &InputArgs, options: &AnalysisArgs, out: &Path, from: &str, to: &str) -> Result<()> {
    let config = options.config()?;
    let dataset = input.load()?;
    let projects = profile_projects(&dataset, &config.thresholds)?;
    let before = find_project(&projects, from)?;
    let after = find_project(&projects, to)?;
    let result = pipeline::compare_projects(before, after, &config.barnard)?;
    print_transition(&result);
    create_dir(out)?;
    let name = format!(
        "transitions_{}_{}.json",
        report::file_stem(from),
        report::file_stem(to)
    );
    write_file(&out.join(name), &to_json(&result))
}

fn cmd_synth(spec_path: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let mut spec = PlantedCohortSpec::load(spec_path)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let cohort = synth::plant_cohort(&spec)?;
    create_dir(out)?;
    cohort.dataset.write_csv_dir(out)?;
    cohort.dataset.write_json(out.join(model::DATASET_FILE))?;

    println!(
        "{:<10} {:<10} {:<10} {:<6} {:>8} {:>8}  planted role",
        "project", "team", "student", "leader", "quantity", "hetero"
    );
    for a in &cohort.planted {
        println!(
            "{:<10} {:<10} {:<10} {:<6} {:>8.4} {:>8.4}  {}",
            a.project_id,
            a.team_id,
            a.student_id,
            if a.leader { "yes" } else { "" },
            a.quantity,
            a.heterogeneity,
            a.role
        );
    }
    let mut per_project: BTreeMap<&str, BTreeMap<RoleLabel, usize>> = BTreeMap::new();
    for a in &cohort.planted {
        *per_project.entry(&a.project_id).or_default().entry(a.role).or_default() += 1;
    }
    for (project, counts) in per_project {
        let parts: Vec<String> = counts.iter().map(|(role, n)| format!("{n} {role}")).collect();
        println!("{project}: {}", parts.join(", "));
    }
    println!(
        "seed {}, {} students, wrote {}",
        spec.seed,
        cohort.planted.len(),
        out.display()
    );
    Ok(())
}
