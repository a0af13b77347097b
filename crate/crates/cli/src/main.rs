use clap::{Parser, Subcommand};
use scenemine_cli::{eval, gen, mine, synth, validate};

#[derive(Parser)]
#[command(name = "scenemine", version, about = "Mine driving logs for scenarios described by programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run programs (or synthesized prompts) over a directory of logs.
    Mine(mine::MineArgs),
    /// Score predicted scenario outputs against ground truth.
    Eval(eval::EvalArgs),
    /// Generate synthetic logs with ground truth.
    Gen(gen::GenArgs),
    /// Parse, validate and lint program files.
    Validate(validate::ValidateArgs),
    /// Synthesize programs from descriptions.
    Synth(synth::SynthArgs),
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match Cli::parse().command {
        Command::Mine(a) => mine::run(&a, None),
        Command::Eval(a) => eval::run(&a),
        Command::Gen(a) => gen::run(&a),
        Command::Validate(a) => validate::run(&a),
        Command::Synth(a) => synth::run(&a, None),
    };
    std::process::exit(code);
}
