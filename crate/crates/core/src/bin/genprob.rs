use genprob::cli;

fn main() {
    let out = cli::main_with_args(std::env::args_os());
    if out.status == cli::EXIT_OK || out.status == cli::EXIT_CHECK_FAILED {
        print!("{}", out.text);
    } else {
        eprint!("{}", out.text);
    }
    std::process::exit(out.status);
}
