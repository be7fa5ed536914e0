import argparse
import sys


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="lm-bridge")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the fill-mask/classify service")
    serve.add_argument("--model", required=True,
                       help="model identifier or checkpoint directory")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8800)
    serve.add_argument("--top-k-max", type=int, default=50)
    serve.add_argument("--device", default="cpu")
    serve.add_argument("--seed", type=int, default=0)

    tune = sub.add_parser("finetune",
                          help="fine-tune the classification head offline")
    tune.add_argument("--model", required=True)
    tune.add_argument("--train", required=True,
                      help="TSV of labeled tokens (token\\tlabel or flag file)")
    tune.add_argument("--out", required=True)
    tune.add_argument("--epochs", type=int, default=5)
    tune.add_argument("--lr", type=float, default=2e-5)
    tune.add_argument("--batch-size", type=int, default=16)
    tune.add_argument("--seed", type=int, default=0)
    tune.add_argument("--device", default="cpu")

    args = parser.parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .backend import MaskedLMBackend
        from .config import BridgeConfig
        from .service import create_app

        config = BridgeConfig(model=args.model, host=args.host, port=args.port,
                              top_k_max=args.top_k_max, device=args.device,
                              seed=args.seed)
        app = create_app(MaskedLMBackend(config))
        uvicorn.run(app, host=config.host, port=config.port)
        return 0

    if args.command == "finetune":
        from .finetune import finetune

        out = finetune(args.model, args.train, args.out, epochs=args.epochs,
                       learning_rate=args.lr, batch_size=args.batch_size,
                       seed=args.seed, device=args.device)
        print(f"saved fine-tuned checkpoint to {out}")
        return 0

    return 2  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
