/** Controller: wires DOM events to the API and re-renders after every server
 * response. One in-flight mutation at a time per session, matching the
 * service's single-writer rule; optimistic updates are forbidden. */
import { ApiRequestError, SessionApi } from './api'
import type { SessionView } from './state'
import {
  initialView,
  withAdvance,
  withDecision,
  withEquity,
  withError,
  withFeedback,
  withProfile,
  withSession,
  withSignals,
} from './state'
import { render } from './view'

export class SessionConsole {
  view: SessionView = initialView()
  private failedAction: (() => Promise<void>) | null = null

  constructor(
    readonly root: HTMLElement,
    readonly api: SessionApi,
  ) {
    root.addEventListener('submit', (e) => {
      e.preventDefault()
      const input = this.root.querySelector<HTMLInputElement>('input[name=preference]')
      if (input && input.value.trim()) void this.setPreference(input.value)
    })
    root.addEventListener('click', (e) => {
      const target = e.target as HTMLElement
      if (target.classList.contains('decide')) void this.decide()
      else if (target.classList.contains('agree')) void this.feedback('agree')
      else if (target.classList.contains('disagree')) void this.feedback('disagree')
      else if (target.classList.contains('advance')) void this.advance()
      else if (target.classList.contains('retry')) void this.retry()
    })
  }

  private paint(): void {
    render(this.root, this.view)
  }

  /** Serialize mutations: while one is in flight the buttons are disabled. */
  private async mutate(name: () => Promise<void>): Promise<void> {
    if (this.view.busy) return
    this.view = { ...this.view, busy: true }
    this.paint()
    try {
      await name()
      this.view = { ...this.view, busy: false }
    } catch (err) {
      this.failedAction = name
      const body =
        err instanceof ApiRequestError
          ? err.body
          : { code: 'network_error', message: String(err) }
      this.view = withError({ ...this.view, busy: false }, body)
    }
    this.paint()
  }

  async start(ticker: string, startDate?: string): Promise<void> {
    await this.mutate(async () => {
      const created = await this.api.createSession(ticker, startDate)
      this.view = withSession(this.view, created.session_id, created.cursor)
      this.view = withEquity(this.view, await this.api.getEquity(created.session_id))
    })
  }

  async setPreference(text: string): Promise<void> {
    await this.mutate(async () => {
      const sid = this.requireSession()
      this.view = withProfile(this.view, await this.api.setPreference(sid, text))
      this.view = withSignals(this.view, await this.api.getSignals(sid))
    })
  }

  async decide(): Promise<void> {
    await this.mutate(async () => {
      const sid = this.requireSession()
      this.view = withDecision(this.view, await this.api.decide(sid))
    })
  }

  async feedback(text: string): Promise<void> {
    await this.mutate(async () => {
      const sid = this.requireSession()
      this.view = withFeedback(this.view, await this.api.sendFeedback(sid, text))
    })
  }

  async advance(): Promise<void> {
    await this.mutate(async () => {
      const sid = this.requireSession()
      this.view = withAdvance(this.view, await this.api.advance(sid))
      this.view = withEquity(this.view, await this.api.getEquity(sid))
      this.view = withSignals(this.view, await this.api.getSignals(sid))
    })
  }

  async retry(): Promise<void> {
    const action = this.failedAction
    if (action) {
      this.failedAction = null
      await this.mutate(action)
    }
  }

  private requireSession(): string {
    if (!this.view.sessionId) throw new Error('no active session')
    return this.view.sessionId
  }
}

export function mount(root: HTMLElement, base = ''): SessionConsole {
  const console_ = new SessionConsole(root, new SessionApi(base))
  render(root, console_.view)
  return console_
}
