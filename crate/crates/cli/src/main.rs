use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use chrono::Utc;
use clap::{Args, Parser, Subcommand};
use newsdesk_api::{router, router_with_static, ApiState};
use newsdesk_core::classifiers::{train_propaganda_model, train_section_model, TrainConfig};
use newsdesk_core::clustering::{bcubed_f1, cluster_articles, pairwise_f1};
use newsdesk_core::ingest::{export_jsonl, import_jsonl, FeedRegistry};
use newsdesk_core::synthetic::{propaganda_corpus, section_corpus, story_corpus};
use newsdesk_core::{Article, Language, SectionLabel};
use newsdesk_pipeline::{ClusteringScheduler, Config, FeedPoller, FileQueue, HttpFetcher, OfflineJob, Ticker};
use serde::Deserialize;

const DEFAULT_CONFIG: &str = "newsdesk.toml";

#[derive(Parser)]
#[command(name = "newsdesk", version, about = "News aggregation, story clustering and media profiling")]
struct Cli {
    /// Deployment config (TOML). Defaults apply when the default file is absent.
    #[arg(long, short, global = true, env = "NEWSDESK_CONFIG", default_value = DEFAULT_CONFIG)]
    config: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the read API (and optionally the built web UI).
    Serve(ServeArgs),
    /// Run or inspect the streaming pipeline.
    #[command(subcommand)]
    Pipeline(PipelineCommand),
    /// Run one clustering batch over newly annotated articles.
    Cluster,
    /// Rebuild media profiles and topic statistics once.
    Profiles,
    /// Train a classifier and save it as JSON.
    #[command(subcommand)]
    Train(TrainCommand),
    /// Cluster a labelled corpus and report BCubed and pairwise scores.
    EvalClusters(EvalArgs),
    /// Write every stored article as JSON Lines.
    Export {
        /// Output file; `-` for stdout.
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Load JSON Lines articles into the store.
    Import {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    bind: Option<String>,
    #[arg(long)]
    port: Option<u16>,
    /// Directory with the built web UI, served outside /v1.
    #[arg(long)]
    static_dir: Option<PathBuf>,
    /// Seconds between snapshot reloads from the store and published files.
    #[arg(long, default_value_t = 60)]
    reload_secs: u64,
}

#[derive(Subcommand)]
enum PipelineCommand {
    /// Poll feeds and run every stage plus the scheduled jobs until Ctrl-C.
    Start,
    /// Drain every stage input once, then run clustering and profiles.
    Once,
    /// Re-publish a topic's messages from an offset so consumers see them again.
    Replay {
        #[arg(long)]
        topic: String,
        #[arg(long, default_value_t = 0)]
        from: u64,
    },
    /// Unconsumed messages per stage and consumer group.
    Lag,
}

#[derive(Args)]
struct TrainData {
    /// JSON Lines training data.
    #[arg(long, conflicts_with = "synthetic")]
    data: Option<PathBuf>,
    /// Train on a generated corpus with this many documents per class.
    #[arg(long)]
    synthetic: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum TrainCommand {
    /// Section categorizer; data lines are `{"text", "label", "language"}`.
    Section {
        #[command(flatten)]
        data: TrainData,
        #[arg(long, default_value_t = 2)]
        min_df: usize,
    },
    /// Propaganda model; data lines are `{"text", "propagandistic"}`.
    Propaganda {
        #[command(flatten)]
        data: TrainData,
    },
}

#[derive(Args)]
struct EvalArgs {
    /// JSON Lines of articles with a `gold` story label; the synthetic corpus when absent.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn load_config(path: &Path) -> Result<Config> {
    if path.exists() {
        return Ok(Config::load(path)?);
    }
    if path != Path::new(DEFAULT_CONFIG) {
        bail!("config file {} not found", path.display());
    }
    let mut config = Config::default();
    config.apply_env(|k| std::env::var(k).ok())?;
    Ok(config)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Train(cmd) => train(cmd),
        Command::EvalClusters(args) => eval_clusters(args),
        command => {
            let config = load_config(&cli.config)?;
            match command {
                Command::Serve(args) => serve(&config, args),
                Command::Pipeline(cmd) => pipeline(&config, cmd),
                Command::Cluster => cluster_once(&config),
                Command::Profiles => profiles_once(&config),
                Command::Export { out } => export(&config, &out),
                Command::Import { input } => import(&config, &input),
                Command::Train(_) | Command::EvalClusters(_) => unreachable!(),
            }
        }
    }
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).with_context(|| format!("{} line {}", path.display(), i + 1))?);
    }
    Ok(out)
}

fn train(cmd: TrainCommand) -> Result<()> {
    let config = TrainConfig::default();
    let (model, report, out) = match cmd {
        TrainCommand::Section { data, min_df } => {
            #[derive(Deserialize)]
            struct Row {
                text: String,
                label: SectionLabel,
                #[serde(default = "english")]
                language: Language,
            }
            fn english() -> Language {
                Language::En
            }
            let docs: Vec<(String, Language, SectionLabel)> = match (&data.data, data.synthetic) {
                (Some(p), _) => read_jsonl::<Row>(p)?.into_iter().map(|r| (r.text, r.language, r.label)).collect(),
                (None, Some(n)) => section_corpus(n, data.seed).into_iter().map(|(t, l)| (t, Language::En, l)).collect(),
                (None, None) => bail!("pass --data or --synthetic"),
            };
            let language = docs.first().map_or(Language::En, |d| d.1);
            let (m, r) = train_section_model(&docs, min_df, language, &config)?;
            (m, r, data.out)
        }
        TrainCommand::Propaganda { data } => {
            #[derive(Deserialize)]
            struct Row {
                text: String,
                propagandistic: bool,
            }
            let texts: Vec<(String, bool)> = match (&data.data, data.synthetic) {
                (Some(p), _) => read_jsonl::<Row>(p)?.into_iter().map(|r| (r.text, r.propagandistic)).collect(),
                (None, Some(n)) => propaganda_corpus(n, data.seed),
                (None, None) => bail!("pass --data or --synthetic"),
            };
            let (m, r) = train_propaganda_model(&texts, &config)?;
            (m, r, data.out)
        }
    };
    model.save(&out)?;
    println!(
        "saved {} ({} iterations, final loss {:.6})",
        out.display(),
        report.iterations,
        report.loss_trace.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

fn eval_clusters(args: EvalArgs) -> Result<()> {
    #[derive(Deserialize)]
    struct Row {
        #[serde(flatten)]
        article: Article,
        gold: String,
    }
    let labelled: Vec<(Article, String)> = match &args.data {
        Some(p) => read_jsonl::<Row>(p)?.into_iter().map(|r| (r.article, r.gold)).collect(),
        None => story_corpus(5, 20, 12, args.seed)
            .into_iter()
            .map(|(a, t)| (a, t.to_string()))
            .collect(),
    };
    let articles: Vec<Article> = labelled.iter().map(|(a, _)| a.clone()).collect();
    let outcome = cluster_articles(&articles, &Default::default())?;
    let predicted: HashMap<_, _> = outcome.assignment().into_iter().collect();
    let gold: HashMap<_, _> = labelled.into_iter().map(|(a, g)| (a.id, g)).collect();
    let b = bcubed_f1(&predicted, &gold)?;
    let p = pairwise_f1(&predicted, &gold)?;
    println!("articles  {}", articles.len());
    println!("stories   {}", outcome.stories.len());
    println!("bcubed    P={:.4} R={:.4} F1={:.4}", b.precision, b.recall, b.f1);
    println!("pairwise  P={:.4} R={:.4} F1={:.4}", p.precision, p.recall, p.f1);
    Ok(())
}

fn stop_on_ctrl_c() -> Arc<AtomicBool> {
    let stop = Arc::new(AtomicBool::new(false));
    let flag = stop.clone();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().expect("signal runtime");
        if rt.block_on(tokio::signal::ctrl_c()).is_ok() {
            log::info!("stopping");
            flag.store(true, Ordering::Relaxed);
        }
    });
    stop
}

fn pipeline(config: &Config, cmd: PipelineCommand) -> Result<()> {
    match cmd {
        PipelineCommand::Replay { topic, from } => {
            let queue = FileQueue::open(&config.queue.dir)?;
            let n = queue.replay(&topic, from)?;
            println!("re-published {n} messages on `{topic}`");
            Ok(())
        }
        PipelineCommand::Lag => {
            use newsdesk_pipeline::topics::{ANNOTATED, CLUSTERING_GROUP, STAGES};
            let queue = FileQueue::open(&config.queue.dir)?;
            let known = newsdesk_pipeline::Queue::topics(&queue)?;
            let consumers = STAGES.iter().map(|(s, i, _)| (*s, *i)).chain([(CLUSTERING_GROUP, ANNOTATED)]);
            for (group, topic) in consumers {
                let lag = if known.iter().any(|t| t == topic) {
                    newsdesk_pipeline::Queue::lag(&queue, group, topic)?
                } else {
                    0
                };
                println!("{group:<16} {topic:<16} {lag}");
            }
            Ok(())
        }
        PipelineCommand::Once => {
            let store = newsdesk_cli::open_store(config)?;
            let sources = newsdesk_cli::load_sources(config)?;
            let ctx = newsdesk_cli::stage_context(config, store.clone(), &sources)?;
            let (queue, opener) = newsdesk_cli::shared_queue(config)?;
            let polled = FeedPoller::new().poll(&sources.feeds, ctx.fetcher.as_ref(), queue.as_ref(), Utc::now())?;
            println!("polled {} feeds, {} new links", polled.feeds_polled, polled.requests);
            let mut p = newsdesk_cli::build_pipeline(config, &ctx, opener)?;
            let report = p.run_until_idle()?;
            println!(
                "processed {} messages in {} steps ({} dead-lettered)",
                report.messages, report.steps, report.dead_lettered
            );
            cluster_once(config)?;
            profiles_once(config)
        }
        PipelineCommand::Start => start(config),
    }
}

fn start(config: &Config) -> Result<()> {
    let stop = stop_on_ctrl_c();
    let store = newsdesk_cli::open_store(config)?;
    let mut registry = config.sources.path.as_ref().map(FeedRegistry::load).transpose()?;
    let mut sources = match &registry {
        Some(r) => (*r.current()).clone(),
        None => Default::default(),
    };
    let poll = Duration::from_millis(config.stages.poll_ms);
    let ctx = newsdesk_cli::stage_context(config, store.clone(), &sources)?;
    let (queue, opener) = newsdesk_cli::shared_queue(config)?;
    let mut handle = newsdesk_cli::build_pipeline(config, &ctx, opener.clone())?.start(poll);

    let scheduler = Arc::new(ClusteringScheduler::new(
        config.clustering.clone(),
        store.clone(),
        &config.publish.dir,
    )?);
    let clustering = {
        let (scheduler, queue) = (scheduler.clone(), queue.clone());
        Ticker::spawn("clustering", config.schedules.clustering_every(), move || {
            match scheduler.tick(queue.as_ref(), Utc::now()) {
                Some(Ok(t)) => log::info!("clustering: {} new articles, {} stories", t.new_articles, t.stories),
                Some(Err(e)) => log::error!("clustering: {e}"),
                None => log::info!("clustering: previous batch still running"),
            }
        })
    };
    let offline = {
        let job = OfflineJob::new(newsdesk_cli::offline_inputs(config, &sources)?, store.clone(), &config.publish.dir);
        Ticker::spawn("offline", config.schedules.offline_every(), move || match job.tick(Utc::now()) {
            Some(Ok(p)) => log::info!("profiles: {} media, {} topics", p.profiles.len(), p.topics.len()),
            Some(Err(e)) => log::error!("profiles: {e}"),
            None => {}
        })
    };

    let fetcher = HttpFetcher::new(&config.fetch)?;
    let mut poller = FeedPoller::new();
    while !stop.load(Ordering::Relaxed) {
        if let Some(r) = registry.as_mut() {
            match r.reload_if_changed() {
                Ok(true) => {
                    log::info!("sources changed; restarting stages");
                    sources = (*r.current()).clone();
                    handle.stop();
                    let ctx = newsdesk_cli::stage_context(config, store.clone(), &sources)?;
                    handle = newsdesk_cli::build_pipeline(config, &ctx, opener.clone())?.start(poll);
                }
                Ok(false) => {}
                Err(e) => log::error!("keeping previous sources: {e}"),
            }
        }
        match poller.poll(&sources.feeds, &fetcher, queue.as_ref(), Utc::now()) {
            Ok(r) if r.requests > 0 => log::info!("polled {} feeds, {} new links", r.feeds_polled, r.requests),
            Ok(_) => {}
            Err(e) => log::error!("feed polling: {e}"),
        }
        std::thread::sleep(Duration::from_secs(1));
    }
    handle.stop();
    clustering.stop();
    offline.stop();
    Ok(())
}

fn cluster_once(config: &Config) -> Result<()> {
    let store = newsdesk_cli::open_store(config)?;
    let (queue, _) = newsdesk_cli::shared_queue(config)?;
    let scheduler = ClusteringScheduler::new(config.clustering.clone(), store, &config.publish.dir)?;
    let tick = scheduler.tick(queue.as_ref(), Utc::now()).expect("no concurrent run")?;
    println!("clustered {} new articles into {} stories", tick.new_articles, tick.stories);
    Ok(())
}

fn profiles_once(config: &Config) -> Result<()> {
    let store = newsdesk_cli::open_store(config)?;
    let sources = newsdesk_cli::load_sources(config)?;
    let job = OfflineJob::new(newsdesk_cli::offline_inputs(config, &sources)?, store, &config.publish.dir);
    let published = job.tick(Utc::now()).expect("no concurrent run")?;
    println!("profiled {} media and {} topics", published.profiles.len(), published.topics.len());
    Ok(())
}

fn export(config: &Config, out: &Path) -> Result<()> {
    let store = newsdesk_cli::open_store(config)?;
    let n = if out == Path::new("-") {
        export_jsonl(store.as_ref(), BufWriter::new(std::io::stdout().lock()))?
    } else {
        let file = std::fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
        export_jsonl(store.as_ref(), BufWriter::new(file))?
    };
    eprintln!("exported {n} articles");
    Ok(())
}

fn import(config: &Config, input: &Path) -> Result<()> {
    let store = newsdesk_cli::open_store(config)?;
    let file = std::fs::File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let n = import_jsonl(store.as_ref(), BufReader::new(file))?;
    println!("imported {n} new articles");
    Ok(())
}

fn serve(config: &Config, args: ServeArgs) -> Result<()> {
    let bind = args.bind.unwrap_or_else(|| config.api.bind.clone());
    let port = args.port.unwrap_or(config.api.port);
    let addr: SocketAddr = format!("{bind}:{port}")
        .parse()
        .with_context(|| format!("bad bind address {bind}:{port}"))?;
    let store = newsdesk_cli::open_store(config)?;
    let state = Arc::new(ApiState::new(newsdesk_cli::load_snapshot(config, store.as_ref())?));
    let app = match &args.static_dir {
        Some(dir) => router_with_static(state.clone(), dir),
        None => router(state.clone()),
    };
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let reload_config = config.clone();
        let every = Duration::from_secs(args.reload_secs.max(1));
        tokio::spawn(async move {
            let mut interval = tokio::time::interval(every);
            interval.tick().await;
            loop {
                interval.tick().await;
                let (config, store, state) = (reload_config.clone(), store.clone(), state.clone());
                let loaded = tokio::task::spawn_blocking(move || {
                    newsdesk_cli::load_snapshot(&config, store.as_ref()).map(|s| state.replace(s))
                })
                .await;
                match loaded {
                    Ok(Ok(())) => log::debug!("snapshot reloaded"),
                    Ok(Err(e)) => log::error!("snapshot reload failed, keeping the previous one: {e}"),
                    Err(e) => log::error!("snapshot reload panicked: {e}"),
                }
            }
        });
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        newsdesk_api::serve(addr, app, shutdown).await
    })?;
    Ok(())
}
