import http from "node:http";

export interface ServerOptions {
  host: string;
  port: number;
}

const settings: ServerOptions = {
  host: process.env.HOST ?? "127.0.0.1",
  port: Number(process.env.PORT ?? 8080),
};

const started = Date.now();

function formatUptime(seconds: number): string {
  const h = Math.floor(seconds / 3600);
  const m = Math.floor((seconds % 3600) / 60);
  return `${h}h ${m}m`;
}

function handle(req: http.IncomingMessage, res: http.ServerResponse) {
  if (req.url === "/health") {
    res.end("ok");
    return;
  }
  const uptime = formatUptime((Date.now() - started) / 1000);
  res.end(`up ${uptime}`);
}

export function start(options: Partial<ServerOptions> = {}) {
  const server = http.createServer(handle);
  const opts = { ...settings, ...options };
  server.on("error", (err) => {
    console.error(`listen failed on ${opts.host}:${opts.port}`, err);
    process.exitCode = 1;
  });
  server.listen(opts.port, opts.host);
  return server;
}
