//! Train a single ring-attractor agent on the 9x9 gridworld by hand.
//!
//! Run with `cargo run --release --example gridworld_agent [Variant]`, e.g.
//! `Baseline`, `Ring` or `RingUA`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ringrl::agents::{Agent, AgentConfig, Variant};
use ringrl::envs::{Environment, GridConfig, GridWorld};
use ringrl::ring::RingConfig;
use ringrl::ring_rnn::RnnConfig;

fn main() -> ringrl::Result<()> {
    let variant: Variant = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(Variant::Ring);
    let agent_config = AgentConfig {
        variant,
        learning_rate: Some(0.2),
        prior_variance: 0.001,
        noise_variance: 0.01,
        ..Default::default()
    };
    // A step cap well above what any decision needs keeps the example quick.
    let ring_config = RingConfig {
        settle_max_steps: 1000,
        settle_tolerance: 1e-6,
        ..Default::default()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut env = GridWorld::new(GridConfig::default())?;
    let mut agent = Agent::new(
        agent_config,
        &ring_config,
        &RnnConfig::default(),
        env.observation_len(),
        env.n_actions(),
        &mut rng,
    )?;

    for episode in 0..60 {
        let mut obs = env.reset(rng.random());
        agent.begin_episode();
        let mut ret = 0.0;
        loop {
            let action = agent.select_action(&obs, &mut rng)?;
            let out = env.step(action)?;
            ret += out.reward;
            agent.observe(obs, action, out.reward, out.observation.clone(), out.done && !out.truncated);
            agent.learn(&mut rng)?;
            obs = out.observation;
            if out.done {
                break;
            }
        }
        if episode % 5 == 4 {
            println!("{variant} episode {:>3}: return {ret:+.2} in {} steps", episode + 1, env.steps());
        }
    }
    Ok(())
}
