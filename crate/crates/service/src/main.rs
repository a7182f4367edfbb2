use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vidseek_service::params::{parse_ks, parse_weights, weight_order};
use vidseek_service::{dto, render, router, AppState};
use vidseek_core::{Engine, SearchRequest, VideoId, WeightProfile};

#[derive(Parser)]
#[command(name = "vidseek", version, about = "Content-based key-frame retrieval for video collections")]
struct Cli {
    /// Catalog directory.
    #[arg(long, global = true, env = "VIDSEEK_DATA_DIR", default_value = "vidseek-data")]
    data_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest a directory of frame images as one video.
    Ingest { name: String, frame_dir: PathBuf },
    /// Rank stored key frames against a query image.
    Query {
        image: PathBuf,
        #[arg(long, default_value_t = vidseek_core::engine::DEFAULT_K)]
        k: usize,
        /// Seven comma-separated weights: histogram,glcm,gabor,tamura,correlogram,naive,regions.
        #[arg(long)]
        weights: Option<String>,
        /// Rank every stored frame instead of the range-index candidates.
        #[arg(long)]
        exhaustive: bool,
        /// Print the same JSON body as the HTTP API.
        #[arg(long)]
        json: bool,
    },
    /// Remove a video and all of its key frames.
    Delete { v_id: u64 },
    /// List stored videos.
    List,
    /// Precision at k for every method, from a labels file.
    Eval {
        labels: PathBuf,
        #[arg(long, default_value = "20,30,50,100")]
        ks: String,
        #[arg(long)]
        weights: Option<String>,
        #[arg(long)]
        csv: bool,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, env = "VIDSEEK_ADDR", default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Token required in the x-admin-token header for ingest and delete.
        #[arg(long, env = "VIDSEEK_ADMIN_TOKEN")]
        admin_token: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let text = e.render().to_string();
            eprintln!("{}", text.lines().next().unwrap_or("error: invalid arguments"));
            return ExitCode::from(2);
        }
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(out) => {
            if !out.is_empty() {
                print!("{out}");
                if !out.ends_with('\n') {
                    println!();
                }
            }
            ExitCode::SUCCESS
        }
        Err(msg) => {
            eprintln!("error: {}", msg.lines().next().unwrap_or_default());
            ExitCode::FAILURE
        }
    }
}

fn weights(arg: Option<&str>) -> Result<WeightProfile, String> {
    match arg {
        Some(w) => parse_weights(w).map_err(|e| format!("--weights: {e} (order {})", weight_order())),
        None => Ok(WeightProfile::equal()),
    }
}

fn open(dir: &Path) -> Result<Engine, String> {
    Engine::open(dir).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<String, String> {
    let s = |e: vidseek_core::EngineError| e.to_string();
    match cli.command {
        Command::Ingest { name, frame_dir } => {
            let report = open(&cli.data_dir)?.ingest_dir(&name, &frame_dir).map_err(s)?;
            Ok(render::ingest_summary(&report))
        }
        Command::Query {
            image,
            k,
            weights: w,
            exhaustive,
            json,
        } => {
            let engine = open(&cli.data_dir)?;
            let bytes = std::fs::read(&image).map_err(|e| format!("{}: {e}", image.display()))?;
            let req = SearchRequest {
                k,
                weights: weights(w.as_deref())?,
                exhaustive,
                ..SearchRequest::new(bytes)
            };
            let hits = engine.search(&req).map_err(s)?;
            if json {
                serde_json::to_string_pretty(&dto::SearchResults::from_hits(&hits)).map_err(|e| e.to_string())
            } else {
                Ok(render::hits_table(&hits))
            }
        }
        Command::Delete { v_id } => {
            open(&cli.data_dir)?.delete(VideoId(v_id)).map_err(s)?;
            Ok(format!("deleted video {v_id}"))
        }
        Command::List => Ok(render::video_list(&open(&cli.data_dir)?.catalog().snapshot())),
        Command::Eval {
            labels,
            ks,
            weights: w,
            csv,
        } => {
            let ks = parse_ks(&ks).map_err(|e| format!("--ks: {e}"))?;
            let report = open(&cli.data_dir)?
                .evaluate_file(&labels, &ks, &weights(w.as_deref())?)
                .map_err(s)?;
            Ok(if csv { report.to_csv() } else { report.to_text() })
        }
        Command::Serve { addr, admin_token } => {
            let engine = open(&cli.data_dir)?;
            serve(AppState::new(engine, admin_token), addr).map(|()| String::new())
        }
    }
}

fn serve(state: AppState, addr: SocketAddr) -> Result<(), String> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| e.to_string())?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| format!("bind {addr}: {e}"))?;
        eprintln!("listening on http://{}", listener.local_addr().map_err(|e| e.to_string())?);
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| e.to_string())
    })
}
