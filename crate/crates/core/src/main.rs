use amortized_sampler::cli::{init_thread_pool, run_command};

fn main() {
    if let Err(e) = init_thread_pool() {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
    std::process::exit(run_command(std::env::args_os()));
}
