use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let r = tenkit_cli::run(std::env::args_os());
    print!("{}", r.stdout());
    if let Some(err) = &r.error {
        eprint!("{err}");
        if !err.ends_with('\n') {
            eprintln!();
        }
    }
    let _ = std::io::stdout().flush();
    ExitCode::from(r.code as u8)
}
